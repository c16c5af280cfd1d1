//! Radial weights `v_r` supported in `B_{3r}` for the integral doubling
//! estimate of `𝓛 = ∏_k (Δ + γ_k)`, and the polynomial weight `(|x|²−r²)^k`.
//!
//! The weight is `v_r = ψ_r ṽ_r / N` where `ṽ_r = |x|^{-α} − P_{2m−1}(|x|; 3r)`
//! removes the Taylor polynomial of `|x|^{-α}` at `3r`, `ψ_r` cuts off inside
//! `B_{r/2}`, and `N = inf_{r ≤ |x| ≤ 2r} 𝓛ṽ_r`. Everything is computed at
//! unit radius with `γ_k r²` in place of `γ_k` and rescaled on output, so the
//! exact radial calculus never sees `r^{-α}`.

pub mod cutoff;
mod invariants;
pub mod polynomial;
pub mod radial;

pub use cutoff::{box_lengths, build_cutoff, CutoffFunction, PiecewisePoly};
pub use invariants::{lemma4_invariants, semifactorial, semifactorial_ratio, InvariantReport};
pub use polynomial::{polynomial_weight, verify_theorem3_threshold, PolynomialWeight, ThresholdReport};
pub use radial::{apply_laplacian_radial, apply_power_lm, apply_script_l, RadialExpansion, RadialOperator};

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// The weight lives on `B_{cr}` with `c = 3`, so `r ≤ r₀/3`.
pub const OUTER_FACTOR: f64 = 3.0;
pub const DEFAULT_R0: f64 = 0.5;
/// Tolerance of the weight property checks.
pub const LEMMA1_TOLERANCE: f64 = 1e-9;
/// Radial grid size for the infimum over `[r, 2r]`.
pub const ANNULUS_SAMPLES: usize = 4096;
/// `γ_k` used for every calibration run of the unrestricted sign case.
pub const CASE_B_GAMMA: f64 = -10.0;
/// Multipliers tried, in order, by [`calibrate`].
pub const K_LADDER: [f64; 13] = [1.0, 1.25, 1.5, 2.0, 2.5, 3.0, 4.0, 5.0, 6.0, 8.0, 10.0, 12.0, 16.0];

/// Sign restriction on the shifts `γ_k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SignCase {
    /// All `γ_k ≥ 0`.
    #[serde(rename = "a")]
    A,
    /// Arbitrary signs.
    #[serde(rename = "b")]
    B,
}

impl SignCase {
    pub fn of(gammas: &[f64]) -> Self {
        if gammas.iter().all(|&g| g >= 0.0) {
            Self::A
        } else {
            Self::B
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Self::A => "a",
            Self::B => "b",
        }
    }
}

/// `m^{(d+1)/2}` for `d ≥ 4`, `m log²(m+1)` otherwise.
pub fn growth_parameter(d: usize, m: usize) -> f64 {
    let mf = m as f64;
    if d >= 4 {
        mf.powf((d as f64 + 1.0) / 2.0)
    } else {
        let l = (mf + 1.0).ln();
        mf * l * l
    }
}

/// `γ = max_k |γ_k|`.
pub fn gamma_of(gammas: &[f64]) -> f64 {
    gammas.iter().fold(0.0, |g, x| g.max(x.abs()))
}

/// Decay exponent `α = K·growth(d, m)`, plus `K'·√(mγ)·r₀` in the
/// unrestricted sign case.
pub fn select_alpha(d: usize, m: usize, gamma: f64, r0: f64, case: SignCase, k: f64, k_prime: f64) -> f64 {
    let base = k * growth_parameter(d, m);
    match case {
        SignCase::A => base,
        SignCase::B => base + k_prime * (m as f64 * gamma).sqrt() * r0,
    }
}

/// `σ` in the constant bound `C₀ exp(C₁ σ)`.
pub fn constant_exponent(d: usize, m: usize, gamma: f64, r0: f64, case: SignCase) -> f64 {
    select_alpha(d, m, gamma, r0, case, 1.0, 1.0)
}

/// `C₀ exp(C₁ σ(d, m, γ, r₀))` with explicit calibration constants.
pub fn constant_estimate_with(d: usize, m: usize, gamma: f64, r0: f64, case: SignCase, c0: f64, c1: f64) -> f64 {
    c0 * (c1 * constant_exponent(d, m, gamma, r0, case)).exp()
}

/// Growth bound for the weight constant using the calibrated `C₀, C₁`.
pub fn constant_estimate(d: usize, m: usize, gamma: f64, r0: f64, case: SignCase) -> Result<f64> {
    let g = crate::constants::global()?.growth(d, case)?;
    Ok(constant_estimate_with(d, m, gamma, r0, case, g.c0, g.c1))
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// `|x|^{-α} − P_{2m−1}(|x|; s)` where `P` is the Taylor polynomial at `s`.
fn remainder_expansion(alpha: f64, m: usize, s: f64, d: usize) -> RadialExpansion {
    let mut terms = vec![(1.0, -alpha)];
    let mut coef = 1.0;
    for k in 0..2 * m {
        if k > 0 {
            coef *= (alpha + (k - 1) as f64) / k as f64;
        }
        for i in 0..=k {
            let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
            terms.push((-coef * binomial(k, i) * sign * s.powf(-alpha - i as f64), i as f64));
        }
    }
    RadialExpansion::new(d, terms)
}

/// `ṽ_r = |x|^{-α} − P_{2m−1}(|x|; 3r)` as an exact radial expansion.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TaylorRemainderWeight {
    pub alpha: f64,
    pub m: usize,
    pub r: f64,
    pub d: usize,
    pub expansion: RadialExpansion,
}

impl TaylorRemainderWeight {
    pub fn eval(&self, rho: f64) -> Result<f64> {
        self.expansion.eval(rho)
    }

    /// Largest `|∂_ρ^j ṽ_r(3r)|` over `j < 2m`, relative to the sum of the
    /// absolute values of the contributing terms.
    pub fn boundary_residual(&self) -> f64 {
        boundary_residual(&self.expansion, self.m, OUTER_FACTOR * self.r).0
    }
}

fn boundary_residual(e: &RadialExpansion, m: usize, s: f64) -> (f64, usize) {
    let mut worst = (0.0, 0);
    for j in 0..2 * m {
        let dj = e.derivative(j);
        let rel = dj.at(s).abs() / dj.abs_at(s).max(f64::MIN_POSITIVE);
        if rel > worst.0 {
            worst = (rel, j);
        }
    }
    worst
}

pub fn taylor_remainder(alpha: f64, m: usize, r: f64, d: usize) -> Result<TaylorRemainderWeight> {
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(Error::InvalidParameter(format!("alpha {alpha} must be positive")));
    }
    if m == 0 || d == 0 {
        return Err(Error::InvalidParameter("m and d must be at least 1".into()));
    }
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::InvalidParameter(format!("radius {r} must be positive")));
    }
    let expansion = remainder_expansion(alpha, m, OUTER_FACTOR * r, d);
    Ok(TaylorRemainderWeight { alpha, m, r, d, expansion })
}

/// Parameters of the weight construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightConfig {
    pub d: usize,
    pub m: usize,
    pub gammas: Vec<f64>,
    pub r: f64,
    pub r0: f64,
    pub case: SignCase,
    pub alpha: f64,
}

impl WeightConfig {
    pub fn new(d: usize, m: usize, gammas: Vec<f64>, r: f64, r0: f64, case: SignCase, alpha: f64) -> Result<Self> {
        let cfg = Self { d, m, gammas, r, r0, case, alpha };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Configuration at `r = r₀/3` with `α` from [`select_alpha`] and the
    /// calibrated multiplier for `(d, m, case)`.
    pub fn calibrated(d: usize, m: usize, gammas: Vec<f64>, r0: f64, case: SignCase) -> Result<Self> {
        let c = crate::constants::global()?;
        let entry = c.weight(d, m, case)?;
        let alpha = select_alpha(d, m, gamma_of(&gammas), r0, case, entry.k, c.k_prime);
        Self::new(d, m, gammas, r0 / OUTER_FACTOR, r0, case, alpha)
    }

    pub fn gamma(&self) -> f64 {
        gamma_of(&self.gammas)
    }

    pub fn validate(&self) -> Result<()> {
        if self.d == 0 || self.m == 0 {
            return Err(Error::InvalidParameter("d and m must be at least 1".into()));
        }
        if self.gammas.len() != self.m {
            return Err(Error::InvalidParameter(format!(
                "expected {} shifts, got {}",
                self.m,
                self.gammas.len()
            )));
        }
        if self.gammas.iter().any(|g| !g.is_finite()) {
            return Err(Error::InvalidParameter("shifts must be finite".into()));
        }
        if self.case == SignCase::A && self.gammas.iter().any(|&g| g < 0.0) {
            return Err(Error::InvalidParameter("sign case a requires all shifts >= 0".into()));
        }
        if !(self.alpha > 0.0) || !self.alpha.is_finite() {
            return Err(Error::InvalidParameter(format!("alpha {} must be positive", self.alpha)));
        }
        if !(self.r > 0.0) || !(self.r0 > 0.0) {
            return Err(Error::InvalidParameter("radii must be positive".into()));
        }
        if self.r > self.r0 / OUTER_FACTOR * (1.0 + 1e-12) {
            return Err(Error::InvalidParameter(format!(
                "radius {} exceeds r0/{OUTER_FACTOR} = {}",
                self.r,
                self.r0 / OUTER_FACTOR
            )));
        }
        Ok(())
    }
}

/// Minimum of `f` on `[a, b]`: grid of `n` points, then golden-section
/// refinement around the best sample.
pub(crate) fn grid_minimum(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> (f64, f64) {
    let h = (b - a) / (n - 1) as f64;
    let mut best = (f(a), a);
    let mut best_i = 0;
    for i in 1..n {
        let x = if i == n - 1 { b } else { a + h * i as f64 };
        let v = f(x);
        if v < best.0 {
            best = (v, x);
            best_i = i;
        }
    }
    let mut lo = a + h * best_i.saturating_sub(1) as f64;
    let mut hi = (a + h * (best_i + 1) as f64).min(b);
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - g * (hi - lo);
    let mut x2 = lo + g * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..80 {
        if f1 < f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = f(x2);
        }
    }
    for (v, x) in [(f1, x1), (f2, x2)] {
        if v < best.0 {
            best = (v, x);
        }
    }
    best
}

/// The assembled weight `v_r = ψ_r ṽ_r / N`.
#[derive(Debug, Clone)]
pub struct Weight {
    cfg: WeightConfig,
    /// `ṽ_1` and its radial derivatives through order `2m`.
    unit_derivs: Vec<RadialExpansion>,
    /// `𝓛' ṽ_1` with `𝓛' = ∏(Δ + γ_k r²)`.
    unit_l: RadialExpansion,
    operator: RadialOperator,
    cutoff: CutoffFunction,
    /// `inf_{[1,2]} 𝓛' ṽ_1` and its location.
    unit_normalization: f64,
    argmin: f64,
}

fn build(cfg: &WeightConfig) -> Result<Weight> {
    cfg.validate()?;
    let m = cfg.m;
    let unit = remainder_expansion(cfg.alpha, m, OUTER_FACTOR, cfg.d);
    let unit_derivs: Vec<RadialExpansion> = (0..=2 * m).map(|j| unit.derivative(j)).collect();
    let scaled: Vec<f64> = cfg.gammas.iter().map(|g| g * cfg.r * cfg.r).collect();
    let unit_l = unit.script_l(&scaled);
    let operator = RadialOperator::script_l(cfg.d, &scaled);
    let cutoff = build_cutoff(1.0, 2 * m)?;
    let (unit_normalization, argmin) = grid_minimum(|s| unit_l.at(s), 1.0, 2.0, ANNULUS_SAMPLES);
    Ok(Weight { cfg: cfg.clone(), unit_derivs, unit_l, operator, cutoff, unit_normalization, argmin })
}

/// Builds `v_r`; fails when `inf 𝓛ṽ_r ≤ 0` on the annulus.
pub fn assemble_weight(cfg: &WeightConfig) -> Result<Weight> {
    let w = build(cfg)?;
    if !(w.unit_normalization > 0.0) {
        return Err(Error::NonPositiveNormalization(w.normalization()));
    }
    Ok(w)
}

impl Weight {
    pub fn config(&self) -> &WeightConfig {
        &self.cfg
    }

    pub fn cutoff(&self) -> &CutoffFunction {
        &self.cutoff
    }

    /// `inf_{B_{2r}∖B_r} 𝓛ṽ_r` in physical units.
    pub fn normalization(&self) -> f64 {
        let c = &self.cfg;
        self.unit_normalization * c.r.powf(-c.alpha - 2.0 * c.m as f64)
    }

    /// Radius where the infimum is attained.
    pub fn normalization_radius(&self) -> f64 {
        self.argmin * self.cfg.r
    }

    /// Radii where the weight or its top derivative may fail to be smooth.
    pub fn breakpoints(&self) -> Vec<f64> {
        let r = self.cfg.r;
        let mut out: Vec<f64> = self.cutoff.pieces().knots().iter().map(|k| k * r).collect();
        out.push(OUTER_FACTOR * r);
        out
    }

    fn unit_derivatives(&self, s: f64, order: usize) -> Vec<f64> {
        let mut out = vec![0.0; order + 1];
        if s < 0.5 || s > OUTER_FACTOR {
            return out;
        }
        let f: Vec<f64> = self.unit_derivs.iter().take(order + 1).map(|e| e.at(s)).collect();
        if s >= 1.0 {
            out[..f.len()].copy_from_slice(&f);
            return out;
        }
        let psi = self.cutoff.derivatives(s, order);
        let mut binom = vec![1.0; order + 1];
        for (j, o) in out.iter_mut().enumerate() {
            if j > 0 {
                for i in (1..j).rev() {
                    binom[i] += binom[i - 1];
                }
            }
            *o = (0..=j).map(|i| binom[i] * psi[i] * f[j - i]).sum();
        }
        out
    }

    fn unit_script_l(&self, s: f64) -> f64 {
        if s < 0.5 || s > OUTER_FACTOR {
            0.0
        } else if s >= 1.0 {
            self.unit_l.at(s)
        } else {
            let k = 2 * self.cfg.m;
            let psi = self.cutoff.derivatives(s, k);
            let f: Vec<f64> = self.unit_derivs.iter().map(|e| e.at(s)).collect();
            self.operator.apply_product(s, &psi, &f)
        }
    }

    fn unit_script_l_piece(&self, piece: usize, s: f64) -> f64 {
        let psi = self.cutoff.pieces().piece_derivatives(piece, s, 2 * self.cfg.m);
        let f: Vec<f64> = self.unit_derivs.iter().map(|e| e.at(s)).collect();
        self.operator.apply_product(s, &psi, &f)
    }

    /// `v_r(ρ)`.
    pub fn eval(&self, rho: f64) -> f64 {
        self.radial_derivatives(rho, 0)[0]
    }

    /// `∂_ρ^j v_r(ρ)` for `j = 0..=order`, `order ≤ 2m`.
    pub fn radial_derivatives(&self, rho: f64, order: usize) -> Vec<f64> {
        let c = &self.cfg;
        let order = order.min(2 * c.m);
        let s = rho / c.r;
        self.unit_derivatives(s, order)
            .into_iter()
            .enumerate()
            .map(|(j, v)| v * c.r.powi((2 * c.m) as i32 - j as i32) / self.unit_normalization)
            .collect()
    }

    /// `𝓛 v_r(ρ)`.
    pub fn script_l(&self, rho: f64) -> f64 {
        self.unit_script_l(rho / self.cfg.r) / self.unit_normalization
    }
}

/// Property of the weight being checked.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Lemma1Property {
    /// Derivatives through order `2m−1` vanish at `3r`.
    #[serde(rename = "i")]
    BoundaryVanishing,
    /// `𝓛v_r ≥ 1` on `[r, 2r]`.
    #[serde(rename = "ii")]
    AnnulusLowerBound,
    /// `𝓛v_r ≥ 0` on `[r, 3r]`.
    #[serde(rename = "iii")]
    Nonnegative,
    /// `sup_{B_r} |𝓛v_r|` is finite.
    #[serde(rename = "iv")]
    BoundedInside,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub property: Lemma1Property,
    pub radius: f64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Lemma1Report {
    pub config: WeightConfig,
    /// Physical `inf 𝓛ṽ_r` on the annulus (may be `≤ 0`).
    pub normalization: f64,
    pub boundary_residual: f64,
    pub annulus_min: Option<f64>,
    pub outer_min: Option<f64>,
    pub c_measured: Option<f64>,
    pub violations: Vec<Violation>,
}

impl Lemma1Report {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks the four weight properties on dense radial grids.
pub fn verify_lemma1(cfg: &WeightConfig) -> Result<Lemma1Report> {
    let w = build(cfg)?;
    let r = cfg.r;
    let mut violations = Vec::new();

    let (boundary_residual, _) = boundary_residual(&w.unit_derivs[0], cfg.m, OUTER_FACTOR);
    if boundary_residual > LEMMA1_TOLERANCE {
        violations.push(Violation {
            property: Lemma1Property::BoundaryVanishing,
            radius: OUTER_FACTOR * r,
            value: boundary_residual,
        });
    }

    let n = w.unit_normalization;
    if !(n > 0.0) {
        violations.push(Violation {
            property: Lemma1Property::AnnulusLowerBound,
            radius: w.argmin * r,
            value: w.normalization(),
        });
        return Ok(Lemma1Report {
            config: cfg.clone(),
            normalization: w.normalization(),
            boundary_residual,
            annulus_min: None,
            outer_min: None,
            c_measured: None,
            violations,
        });
    }

    // midpoints of the normalization grid, so the check is not a tautology
    let h = 1.0 / (ANNULUS_SAMPLES - 1) as f64;
    let (annulus_min, at) = (0..ANNULUS_SAMPLES - 1)
        .map(|i| 1.0 + h * (i as f64 + 0.5))
        .chain([1.0, 2.0])
        .map(|s| (w.unit_l.at(s) / n, s))
        .fold((f64::INFINITY, 1.0), |a, b| if b.0 < a.0 { b } else { a });
    if annulus_min < 1.0 - LEMMA1_TOLERANCE {
        violations.push(Violation { property: Lemma1Property::AnnulusLowerBound, radius: at * r, value: annulus_min });
    }

    let (outer_min, at) =
        grid_minimum(|s| w.unit_l.at(s) / n, 1.0, OUTER_FACTOR, 2 * ANNULUS_SAMPLES);
    if outer_min < -LEMMA1_TOLERANCE {
        violations.push(Violation { property: Lemma1Property::Nonnegative, radius: at * r, value: outer_min });
    }

    let pieces = w.cutoff.pieces();
    let mut sup = 0.0f64;
    let mut sup_at = 0.5;
    for i in 0..pieces.pieces().len() {
        let (a, b) = (pieces.knots()[i], pieces.knots()[i + 1]);
        for k in 0..=8 {
            let s = a + (b - a) * k as f64 / 8.0;
            let v = (w.unit_script_l_piece(i, s) / n).abs();
            if !(v <= sup) {
                sup = v;
                sup_at = s;
            }
        }
    }
    let c_measured = if sup.is_finite() {
        Some(sup)
    } else {
        violations.push(Violation { property: Lemma1Property::BoundedInside, radius: sup_at * r, value: sup });
        None
    };

    Ok(Lemma1Report {
        config: cfg.clone(),
        normalization: w.normalization(),
        boundary_residual,
        annulus_min: Some(annulus_min),
        outer_min: Some(outer_min),
        c_measured,
        violations,
    })
}

/// Outcome of calibrating the `α` multiplier for one `(d, m, case)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightCalibration {
    pub d: usize,
    pub m: usize,
    pub case: SignCase,
    pub k: f64,
    pub alpha: f64,
    pub c_measured: f64,
    pub domination: f64,
    pub main_term: f64,
}

/// Shifts used when calibrating a sign case.
pub fn calibration_gammas(m: usize, case: SignCase) -> Vec<f64> {
    match case {
        SignCase::A => vec![0.0; m],
        SignCase::B => vec![CASE_B_GAMMA; m],
    }
}

/// Smallest multiplier on [`K_LADDER`] for which the weight properties, the
/// positivity and cascade of `Δ^q ṽ_r`, and the main-term regime all hold.
pub fn calibrate(d: usize, m: usize, case: SignCase, r0: f64, k_prime: f64) -> Result<WeightCalibration> {
    let gammas = calibration_gammas(m, case);
    let gamma = gamma_of(&gammas);
    for &k in &K_LADDER {
        let alpha = select_alpha(d, m, gamma, r0, case, k, k_prime);
        let cfg = WeightConfig::new(d, m, gammas.clone(), r0 / OUTER_FACTOR, r0, case, alpha)?;
        let report = verify_lemma1(&cfg)?;
        if !report.passed() {
            continue;
        }
        let inv = lemma4_invariants(alpha, m, d);
        if inv.holds() {
            return Ok(WeightCalibration {
                d,
                m,
                case,
                k,
                alpha,
                c_measured: report.c_measured.unwrap_or(f64::INFINITY),
                domination: inv.domination_ratio,
                main_term: inv.main_term_ratio,
            });
        }
    }
    Err(Error::Precondition(format!("no multiplier on the ladder works for d={d}, m={m}, case {}", case.label())))
}

/// `C₀, C₁` with `1 + C_measured ≤ C₀ exp(C₁ σ)` on every calibration entry.
///
/// `C₁` is the least-squares slope of `log(1 + C)` against `σ`, clamped at 0;
/// `C₀` is then raised until the bound holds everywhere, and is at least 1.
pub fn fit_growth(entries: &[(f64, f64)]) -> (f64, f64) {
    let n = entries.len() as f64;
    let ys: Vec<(f64, f64)> = entries.iter().map(|&(s, c)| (s, (1.0 + c).ln())).collect();
    let c1 = if entries.len() < 2 {
        0.0
    } else {
        let sx = ys.iter().map(|p| p.0).sum::<f64>() / n;
        let sy = ys.iter().map(|p| p.1).sum::<f64>() / n;
        let sxy: f64 = ys.iter().map(|p| (p.0 - sx) * (p.1 - sy)).sum();
        let sxx: f64 = ys.iter().map(|p| (p.0 - sx) * (p.0 - sx)).sum();
        if sxx > 0.0 {
            (sxy / sxx).max(0.0)
        } else {
            0.0
        }
    };
    let log_c0 = ys.iter().map(|&(s, y)| y - c1 * s).fold(0.0, f64::max);
    (log_c0.exp() * (1.0 + 1e-12), c1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn select_alpha_examples() {
        let a = select_alpha(4, 3, 0.0, 0.5, SignCase::A, 1.0, 1.0);
        assert!((a - 3f64.powf(2.5)).abs() < 1e-12);
        assert!((a - 15.588).abs() < 1e-3);
        let a = select_alpha(2, 4, 0.0, 0.5, SignCase::A, 1.0, 1.0);
        assert!((a - 10.36).abs() < 5e-3);
        let a = select_alpha(3, 2, 100.0, 0.5, SignCase::B, 1.0, 1.0);
        let want = 2.0 * 3f64.ln().powi(2) + 200f64.sqrt() * 0.5;
        assert!((a - want).abs() < 1e-12);
        assert!((a - 9.48).abs() < 1e-2);
    }

    #[test]
    fn taylor_remainder_example() {
        let t = taylor_remainder(1.0, 1, 1.0 / 3.0, 3).unwrap();
        let want = RadialExpansion::new(3, [(1.0, -1.0), (-2.0, 0.0), (1.0, 1.0)]);
        assert_eq!(t.expansion.terms().len(), 3);
        for (a, b) in t.expansion.terms().iter().zip(want.terms()) {
            assert!((a.0 - b.0).abs() < 1e-14 && (a.1 - b.1).abs() < 1e-14);
        }
        for &rho in &[0.2, 0.5, 0.9] {
            let direct = 1.0 / rho - 2.0 + rho;
            assert!((t.eval(rho).unwrap() - direct).abs() < 1e-14);
        }
    }

    #[test]
    fn taylor_remainder_vanishes_at_outer_radius() {
        for m in 1..=5 {
            for &alpha in &[0.7, 3.0, 11.5] {
                let r = 0.1;
                let t = taylor_remainder(alpha, m, r, 3).unwrap();
                assert!(t.boundary_residual() < 1e-9, "m={m} alpha={alpha}");
                let rho = 1.5 * r;
                let v = t.eval(rho).unwrap();
                assert!(v >= 0.0 && v <= rho.powf(-alpha));
            }
        }
    }

    #[test]
    fn remainder_bounded_by_the_power() {
        let t = taylor_remainder(4.2, 3, 0.2, 2).unwrap();
        for i in 1..=300 {
            let rho = 0.6 * i as f64 / 300.0;
            let v = t.eval(rho).unwrap();
            let p = rho.powf(-4.2);
            assert!(v >= -1e-12 * p && v <= p * (1.0 + 1e-12), "rho={rho}");
        }
    }

    #[test]
    fn normalization_and_support() {
        let cfg = WeightConfig::new(3, 1, vec![0.0], 0.1, 0.5, SignCase::A, 2.0).unwrap();
        let w = assemble_weight(&cfg).unwrap();
        let rho = w.normalization_radius();
        assert!((w.script_l(rho) - 1.0).abs() < 1e-12);
        // Δ|x|^{-2} − Δ(linear part) is decreasing, so the infimum is at 2r
        assert!((rho - 0.2).abs() < 1e-9);
        assert!((w.script_l(0.2) - 1.0).abs() < 1e-9);
        assert_eq!(w.eval(0.04), 0.0);
        assert_eq!(w.eval(0.05), 0.0);
        assert!(w.eval(0.07) > 0.0);
        let edge = w.radial_derivatives(0.3, 1);
        let scale = w.radial_derivatives(0.2, 1);
        assert!(edge[0].abs() <= 1e-12 * scale[0].abs());
        assert!(edge[1].abs() <= 1e-9 * scale[1].abs());
    }

    #[test]
    fn physical_scaling_matches_direct_expansion() {
        let cfg = WeightConfig::new(2, 2, vec![1.0, 3.0], 0.12, 0.5, SignCase::A, 6.0).unwrap();
        let w = assemble_weight(&cfg).unwrap();
        let t = taylor_remainder(6.0, 2, 0.12, 2).unwrap();
        let l = t.expansion.script_l(&cfg.gammas);
        let n = w.normalization();
        for &rho in &[0.13, 0.2, 0.3] {
            let want = l.at(rho) / n;
            assert!((w.script_l(rho) - want).abs() <= 1e-9 * l.abs_at(rho) / n);
            let want = t.expansion.at(rho) / n;
            assert!((w.eval(rho) - want).abs() <= 1e-9 * t.expansion.abs_at(rho) / n);
        }
    }

    #[test]
    fn leibniz_matches_derivatives_inside_cutoff() {
        let cfg = WeightConfig::new(3, 2, vec![0.0, 0.0], 0.1, 0.5, SignCase::A, 8.0).unwrap();
        let w = assemble_weight(&cfg).unwrap();
        // for γ = 0 and radial functions, Δ²f = f'''' + 4f'''/ρ in d = 3
        for &rho in &[0.061, 0.075, 0.093] {
            let f = w.radial_derivatives(rho, 4);
            let want = f[4] + 4.0 * f[3] / rho;
            let got = w.script_l(rho);
            assert!((got - want).abs() <= 1e-8 * want.abs().max(1.0), "{got} vs {want}");
        }
    }

    #[test]
    fn lemma1_small_case_passes() {
        let cfg = WeightConfig::new(3, 1, vec![0.0], 0.5 / 3.0, 0.5, SignCase::A, 2.0).unwrap();
        let rep = verify_lemma1(&cfg).unwrap();
        assert!(rep.passed(), "{:?}", rep.violations);
        assert!(rep.c_measured.unwrap().is_finite());
    }

    #[test]
    fn small_alpha_fails_annulus_bound() {
        let cfg = WeightConfig::new(3, 2, vec![0.0, 0.0], 0.1, 0.5, SignCase::A, 0.5).unwrap();
        let rep = verify_lemma1(&cfg).unwrap();
        assert!(!rep.passed());
        assert!(rep.violations.iter().any(|v| v.property == Lemma1Property::AnnulusLowerBound));
        assert!(matches!(assemble_weight(&cfg), Err(Error::NonPositiveNormalization(_))));
    }

    #[test]
    fn config_validation() {
        assert!(WeightConfig::new(3, 2, vec![0.0], 0.1, 0.5, SignCase::A, 2.0).is_err());
        assert!(WeightConfig::new(3, 1, vec![-1.0], 0.1, 0.5, SignCase::A, 2.0).is_err());
        assert!(WeightConfig::new(3, 1, vec![-1.0], 0.1, 0.5, SignCase::B, 2.0).is_ok());
        assert!(WeightConfig::new(3, 1, vec![0.0], 0.2, 0.5, SignCase::A, 2.0).is_err());
        assert!(WeightConfig::new(3, 1, vec![0.0], 0.1, 0.5, SignCase::A, 0.0).is_err());
    }

    #[test]
    fn estimate_is_monotone_in_gamma() {
        let a = constant_estimate_with(3, 2, 0.0, 0.5, SignCase::B, 2.0, 0.7);
        let b = constant_estimate_with(3, 2, 10.0, 0.5, SignCase::B, 2.0, 0.7);
        let c = constant_estimate_with(3, 2, 10.0, 0.5, SignCase::A, 2.0, 0.7);
        assert!(b > a && b > c && a >= 2.0);
        let one = constant_estimate_with(3, 1, 0.0, 0.5, SignCase::A, 2.0, 0.7);
        assert!((one - 2.0 * (0.7 * 2f64.ln().powi(2)).exp()).abs() < 1e-12);
    }

    #[test]
    fn growth_fit_bounds_every_entry() {
        let data = [(1.0, 3.0), (2.0, 40.0), (4.0, 900.0), (7.0, 2e5)];
        let (c0, c1) = fit_growth(&data);
        assert!(c0 >= 1.0 && c1 > 0.0);
        for (s, c) in data {
            assert!(1.0 + c <= c0 * (c1 * s).exp());
        }
    }
}
