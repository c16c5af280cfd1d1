//! LP search for band-limited polynomials that are positive on an arc, and
//! the derivative-bound certificate that checks them.
//!
//! The search maximizes `t` subject to `f(xᵢ) ≥ t` on a grid of the arc and
//! `Σ|aⱼ| ≤ 1` (split as `aⱼ = pⱼ − qⱼ`), where
//! `f(x) = Σ_{j=N}^{2N} aⱼ cos(2πj(x − c))` and `c` is the centre of the arc.
//! A maximum below `δ` on a subset of the constraints proves infeasibility
//! of the whole problem. Otherwise points of the certification grid where
//! `f < δ` are added as cuts until none remain.

use minilp::{ComparisonOp, LinearExpr, OptimizationDirection, Problem, Variable};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{GapPolynomial, SpectrumSet, TrigPolynomial};
use crate::spectral::sin_cos_turns;
use crate::{Error, Result};

/// LP grid points per unit length, per unit of `N`.
const LP_DENSITY: f64 = 64.0;

/// Certification step as a fraction of `δ / (2π N_max Σ|c|)`.
const STEP_FRACTION: f64 = 0.25;

const MAX_CUT_ROUNDS: usize = 200;

/// Cuts added per round, at the lowest local minima below `δ`.
const CUTS_PER_ROUND: usize = 16;

/// Closed arc `[lo, hi]` of the circle `ℝ/ℤ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        let len = hi - lo;
        if !(lo.is_finite() && hi.is_finite()) || !(len > 0.0 && len <= 1.0) {
            return Err(Error::InvalidParameter(format!("arc [{lo}, {hi}] must have length in (0, 1]")));
        }
        Ok(Self { lo, hi })
    }

    /// Arc of length `len` centred at `center`.
    pub fn centered(center: f64, len: f64) -> Result<Self> {
        Self::new(center - 0.5 * len, center + 0.5 * len)
    }

    pub fn len(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn center(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    /// `count + 1` equally spaced points from `lo` to `hi`, spacing at most `h`.
    fn grid(&self, h: f64) -> Vec<f64> {
        let count = (self.len() / h).ceil().max(1.0) as usize;
        (0..=count).map(|i| self.lo + self.len() * i as f64 / count as f64).collect()
    }
}

/// `min_{grid} f − h · 2πN_max Σ|c|` minus a roundoff allowance, on a grid
/// of `I` with spacing at most `h`. Positive values prove `f > 0` on `I`.
/// Returns `−∞` when `h ≤ 0` or the polynomial is not on the circle.
pub fn positivity_margin(p: &TrigPolynomial, interval: &Interval, h: f64) -> f64 {
    if !(h > 0.0) || p.dim() != 1 {
        return f64::NEG_INFINITY;
    }
    let min = interval.grid(h).into_iter().map(|x| p.eval(&[x])).fold(f64::INFINITY, f64::min);
    let terms = p.coefficients().count() as f64;
    let roundoff = 16.0 * f64::EPSILON * (terms + 1.0) * p.abs_sum();
    min - h * p.derivative_bound() - roundoff
}

/// True when [`positivity_margin`] is positive, i.e. `f > 0` on all of `I`
/// because `|f′| ≤ 2πN_max Σ|c|` everywhere.
pub fn certify_positivity(p: &TrigPolynomial, interval: &Interval, h: f64) -> bool {
    positivity_margin(p, interval, h) > 0.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Coefficient {
    pub frequency: i64,
    pub re: f64,
    pub im: f64,
}

/// A polynomial found by the search, with its positivity certificate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapCertificate {
    #[serde(rename = "N")]
    pub n: usize,
    pub interval: Interval,
    pub delta: f64,
    pub coefficients: Vec<Coefficient>,
    pub certified: bool,
    /// Optimal `t` of the final LP.
    pub lp_margin: f64,
    /// Certification grid step.
    pub step: f64,
    /// [`positivity_margin`] at that step.
    pub margin: f64,
    /// Length of the zero-free arc containing `I`.
    pub positive_arc: f64,
    pub cut_rounds: usize,
}

impl GapCertificate {
    pub fn polynomial(&self) -> Result<GapPolynomial> {
        let poly = TrigPolynomial::new(
            1,
            self.coefficients.iter().map(|c| (vec![c.frequency], Complex64::new(c.re, c.im))),
        )?;
        GapPolynomial::new(SpectrumSet::band(self.n as i64, 2 * self.n as i64)?, poly)
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Serialization(e.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum GapSearch {
    Feasible(GapCertificate),
    /// No polynomial with `Σ|c| ≤ 1` reaches `δ` even on the LP grid; the
    /// best achievable minimum there is `lp_margin`.
    Infeasible { lp_margin: f64 },
}

impl GapSearch {
    pub fn certificate(&self) -> Option<&GapCertificate> {
        match self {
            Self::Feasible(c) => Some(c),
            Self::Infeasible { .. } => None,
        }
    }
}

struct Lp {
    n: usize,
    center: f64,
    p: Vec<Variable>,
    q: Vec<Variable>,
    t: Variable,
}

impl Lp {
    fn basis(&self, x: f64) -> Vec<f64> {
        (self.n..=2 * self.n).map(|j| sin_cos_turns(j as f64 * (x - self.center)).1).collect()
    }

    fn row(&self, x: f64) -> LinearExpr {
        let mut e = LinearExpr::empty();
        for ((&p, &q), b) in self.p.iter().zip(&self.q).zip(self.basis(x)) {
            e.add(p, b);
            e.add(q, -b);
        }
        e.add(self.t, -1.0);
        e
    }

    fn amplitudes(&self, s: &minilp::Solution) -> Vec<f64> {
        self.p.iter().zip(&self.q).map(|(&p, &q)| s[p] - s[q]).collect()
    }

    /// `Σ aⱼ cos(2πj(x − c))` in exponential form.
    fn polynomial(&self, amplitudes: &[f64]) -> Result<TrigPolynomial> {
        let mut out = Vec::with_capacity(2 * amplitudes.len());
        for (i, &a) in amplitudes.iter().enumerate() {
            if a == 0.0 {
                continue;
            }
            let j = (self.n + i) as i64;
            let (s, c) = sin_cos_turns(j as f64 * self.center);
            let coef = Complex64::new(c, -s) * (0.5 * a);
            out.push((vec![j], coef));
            out.push((vec![-j], coef.conj()));
        }
        TrigPolynomial::new(1, out)
    }
}

fn solver_error(e: minilp::Error) -> Error {
    Error::SolverFailure(e.to_string())
}

/// Lowest local minima of `values` below `delta`, at most `limit` of them.
fn worst_points(xs: &[f64], values: &[f64], delta: f64, limit: usize) -> Vec<f64> {
    let n = values.len();
    let mut minima: Vec<(f64, f64)> = (0..n)
        .filter(|&i| {
            values[i] < delta
                && (i == 0 || values[i] <= values[i - 1])
                && (i + 1 == n || values[i] <= values[i + 1])
        })
        .map(|i| (values[i], xs[i]))
        .collect();
    minima.sort_by(|a, b| a.0.total_cmp(&b.0));
    minima.into_iter().take(limit).map(|m| m.1).collect()
}

/// Length of the zero-free arc of `p` containing `x`.
fn zero_free_arc(p: &TrigPolynomial, x: f64, samples: usize) -> Result<f64> {
    let zeros = p.circle_zeros(samples)?;
    if zeros.is_empty() {
        return Ok(1.0);
    }
    let x = x.rem_euclid(1.0);
    let after = zeros.iter().copied().find(|&z| z >= x).unwrap_or(zeros[0] + 1.0);
    let before = zeros.iter().copied().rev().find(|&z| z <= x).unwrap_or(zeros[zeros.len() - 1] - 1.0);
    Ok(after - before)
}

/// Searches for `f` with spectrum in `([−2N, −N] ∪ [N, 2N]) ∩ ℤ`,
/// `Σ|c| ≤ 1` and `f ≥ δ` on `I`, then certifies `f > 0` on `I`.
pub fn find_positive_gap_polynomial(n: usize, interval: &Interval, delta: f64) -> Result<GapSearch> {
    if n == 0 {
        return Err(Error::InvalidParameter("N must be at least 1".into()));
    }
    if !(delta > 0.0) || !delta.is_finite() {
        return Err(Error::InvalidParameter(format!("delta {delta} must be positive")));
    }
    let mut problem = Problem::new(OptimizationDirection::Maximize);
    let width = n + 1;
    let p: Vec<Variable> = (0..width).map(|_| problem.add_var(0.0, (0.0, 1.0))).collect();
    let q: Vec<Variable> = (0..width).map(|_| problem.add_var(0.0, (0.0, 1.0))).collect();
    let t = problem.add_var(1.0, (-1.0, 1.0));
    let lp = Lp { n, center: interval.center(), p, q, t };

    let mut norm = LinearExpr::empty();
    for (&a, &b) in lp.p.iter().zip(&lp.q) {
        norm.add(a, 1.0);
        norm.add(b, 1.0);
    }
    problem.add_constraint(norm, ComparisonOp::Le, 1.0);
    for x in interval.grid(1.0 / (LP_DENSITY * n as f64)) {
        problem.add_constraint(lp.row(x), ComparisonOp::Ge, 0.0);
    }

    let mut solution = match problem.solve() {
        Ok(s) => s,
        Err(e) => return Err(solver_error(e)),
    };
    // every f with Σ|c| ≤ 1 has |f| ≤ 1, so the step is small enough for
    // any polynomial the LP can return
    let bound = 2.0 * std::f64::consts::PI * (2 * n) as f64;
    let step = STEP_FRACTION * delta / bound;
    let xs = interval.grid(step);

    let mut rounds = 0;
    loop {
        let lp_margin = solution.objective();
        if lp_margin < delta {
            return Ok(GapSearch::Infeasible { lp_margin });
        }
        let amplitudes = lp.amplitudes(&solution);
        let values: Vec<f64> = xs
            .iter()
            .map(|&x| amplitudes.iter().zip(lp.basis(x)).map(|(a, b)| a * b).sum())
            .collect();
        let cuts = worst_points(&xs, &values, delta, CUTS_PER_ROUND);
        if cuts.is_empty() {
            let poly = lp.polynomial(&amplitudes)?;
            let margin = positivity_margin(&poly, interval, step);
            let samples = (64 * 2 * n).max(1024);
            let positive_arc = zero_free_arc(&poly, interval.center(), samples)?;
            let coefficients = poly
                .coefficients()
                .map(|(nu, c)| Coefficient { frequency: nu[0], re: c.re, im: c.im })
                .collect();
            return Ok(GapSearch::Feasible(GapCertificate {
                n,
                interval: *interval,
                delta,
                coefficients,
                certified: margin > 0.0,
                lp_margin,
                step,
                margin,
                positive_arc,
                cut_rounds: rounds,
            }));
        }
        rounds += 1;
        if rounds > MAX_CUT_ROUNDS {
            return Err(Error::SolverFailure(format!("no certified solution after {MAX_CUT_ROUNDS} cut rounds")));
        }
        for x in cuts {
            solution = match solution.add_constraint(lp.row(x), ComparisonOp::Ge, 0.0) {
                Ok(s) => s,
                Err(minilp::Error::Infeasible) => return Ok(GapSearch::Infeasible { lp_margin: f64::NEG_INFINITY }),
                Err(e) => return Err(solver_error(e)),
            };
        }
    }
}

/// One row of the `N` sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    #[serde(rename = "N")]
    pub n: usize,
    /// Zero-free arc containing `I`; zero when the search failed.
    pub interval_length: f64,
    pub delta: f64,
    pub certified: bool,
    pub lp_margin: f64,
    pub margin: f64,
}

/// Runs [`find_positive_gap_polynomial`] for each `N` in parallel; rows are
/// in the order of `ns`.
pub fn sharpness_sweep(ns: &[usize], interval: &Interval, delta: f64) -> Result<Vec<(SweepRow, GapSearch)>> {
    ns.par_iter()
        .map(|&n| {
            let search = find_positive_gap_polynomial(n, interval, delta)?;
            let row = match &search {
                GapSearch::Feasible(c) => SweepRow {
                    n,
                    interval_length: c.positive_arc,
                    delta,
                    certified: c.certified,
                    lp_margin: c.lp_margin,
                    margin: c.margin,
                },
                GapSearch::Infeasible { lp_margin } => SweepRow {
                    n,
                    interval_length: 0.0,
                    delta,
                    certified: false,
                    lp_margin: *lp_margin,
                    margin: f64::NEG_INFINITY,
                },
            };
            Ok((row, search))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn certify_examples() {
        let whole = Interval::new(0.0, 1.0).unwrap();
        let f = TrigPolynomial::from_real([(0, 1.0, 0.0), (1, 0.5, 0.0)]).unwrap();
        let m = positivity_margin(&f, &whole, 1e-3);
        // min 0.5, bound 2π·1.5
        assert!((m - (0.5 - 1e-3 * 2.0 * std::f64::consts::PI * 1.5)).abs() < 1e-12);
        assert!(certify_positivity(&f, &whole, 1e-3));
        let c = TrigPolynomial::from_real([(1, 1.0, 0.0)]).unwrap();
        assert!(!certify_positivity(&c, &Interval::new(0.2, 0.3).unwrap(), 1e-3));
        assert!(certify_positivity(&c, &Interval::new(0.9, 0.95).unwrap(), 1e-3));
        assert!(!certify_positivity(&c, &Interval::new(0.9, 0.95).unwrap(), 0.0));
    }

    #[test]
    fn single_band_witness() {
        let i = Interval::new(0.4, 0.6).unwrap();
        // −cos(2πx) > 0.3 on I, so the LP must find something
        let witness = TrigPolynomial::from_real([(1, -1.0, 0.0)]).unwrap();
        assert!(positivity_margin(&witness, &i, 1e-4) > 0.3);
        let out = find_positive_gap_polynomial(1, &i, 0.01).unwrap();
        let cert = out.certificate().expect("feasible");
        assert!(cert.certified && cert.lp_margin >= 0.01);
        assert!(cert.positive_arc >= i.len());
        let p = cert.polynomial().unwrap();
        assert!(certify_positivity(p.poly(), &i, cert.step));
    }

    #[test]
    fn spectrum_containment_is_exact() {
        let i = Interval::centered(0.3, 0.1).unwrap();
        let cert = find_positive_gap_polynomial(5, &i, 1e-3).unwrap().certificate().cloned().unwrap();
        for c in &cert.coefficients {
            assert!((5..=10).contains(&c.frequency.abs()));
        }
        let total: f64 = cert.coefficients.iter().map(|c| c.re.hypot(c.im)).sum();
        assert!(total <= 1.0 + 1e-9);
        let back: GapCertificate = serde_json::from_str(&cert.to_json().unwrap()).unwrap();
        assert_eq!(back, cert);
    }

    #[test]
    fn unreachable_delta_is_infeasible() {
        let i = Interval::centered(0.0, 0.1).unwrap();
        match find_positive_gap_polynomial(3, &i, 2.0).unwrap() {
            GapSearch::Infeasible { lp_margin } => assert!(lp_margin <= 1.0 + 1e-9),
            other => panic!("expected infeasible, got {other:?}"),
        }
        assert!(find_positive_gap_polynomial(0, &i, 0.1).is_err());
        assert!(find_positive_gap_polynomial(2, &i, -1.0).is_err());
        assert!(Interval::new(0.5, 0.4).is_err());
    }

    #[test]
    fn certified_polynomial_has_no_zero_in_interval() {
        let i = Interval::centered(0.0, 0.1).unwrap();
        let cert = find_positive_gap_polynomial(4, &i, 1e-3).unwrap().certificate().cloned().unwrap();
        let p = cert.polynomial().unwrap();
        let sum = p.poly().to_eigen_sum().unwrap();
        let field = crate::nodal::sample(&sum, 2048).unwrap();
        let zs = crate::nodal::extract_zero_set(&field).unwrap();
        assert!(!zs.is_empty());
        for z in zs.all_points() {
            let x = z[0].rem_euclid(1.0);
            let dist = x.min(1.0 - x);
            assert!(dist > 0.05, "zero at {x} inside the arc");
        }
    }
}
