//! Trigonometric polynomials with a spectral gap: the zero-density radius
//! `R(S) = Σ_{ν∈S} 1/(8|ν|)`, its check on the circle, and the search for
//! band-limited polynomials that stay positive on a fixed arc.

mod search;

pub use search::{
    certify_positivity, find_positive_gap_polynomial, positivity_margin, sharpness_sweep, GapCertificate, GapSearch,
    Interval, SweepRow,
};

use std::collections::{BTreeMap, BTreeSet};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::spectral::{sin_cos_turns, EigenSum, Mode, Term};
use crate::{Error, Result};

/// Samples required per shortest period `1/N_max` when locating zeros.
pub const SAMPLES_PER_PERIOD: usize = 16;

/// Allowance on root positions found by bisection, in units of the period.
pub const ROOT_TOLERANCE: f64 = 1e-12;

/// Nonzero frequencies closed under negation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<i64>>", into = "Vec<Vec<i64>>")]
pub struct SpectrumSet {
    dim: usize,
    frequencies: BTreeSet<Vec<i64>>,
}

impl SpectrumSet {
    pub fn new(frequencies: impl IntoIterator<Item = Vec<i64>>) -> Result<Self> {
        let frequencies: BTreeSet<Vec<i64>> = frequencies.into_iter().collect();
        let dim = frequencies.iter().next().map(Vec::len).ok_or_else(|| {
            Error::InvalidParameter("spectrum must contain at least one frequency".into())
        })?;
        if dim == 0 {
            return Err(Error::InvalidParameter("frequencies need at least one component".into()));
        }
        for nu in &frequencies {
            if nu.len() != dim {
                return Err(Error::InvalidParameter(format!("frequency {nu:?} is not in dimension {dim}")));
            }
            if nu.iter().all(|&c| c == 0) {
                return Err(Error::InvalidParameter("spectrum must not contain 0".into()));
            }
            if !frequencies.contains(&negate(nu)) {
                return Err(Error::InvalidParameter(format!("spectrum contains {nu:?} but not its negative")));
            }
        }
        Ok(Self { dim, frequencies })
    }

    /// `{±n : n ∈ positive}` on the circle.
    pub fn symmetric(positive: impl IntoIterator<Item = i64>) -> Result<Self> {
        Self::new(positive.into_iter().flat_map(|n| [vec![n], vec![-n]]))
    }

    /// `([−hi, −lo] ∪ [lo, hi]) ∩ ℤ`.
    pub fn band(lo: i64, hi: i64) -> Result<Self> {
        if lo < 1 || hi < lo {
            return Err(Error::InvalidParameter(format!("band [{lo}, {hi}] must satisfy 1 <= lo <= hi")));
        }
        Self::symmetric(lo..=hi)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.frequencies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frequencies.is_empty()
    }

    pub fn contains(&self, nu: &[i64]) -> bool {
        self.frequencies.contains(nu)
    }

    pub fn iter(&self) -> impl Iterator<Item = &Vec<i64>> {
        self.frequencies.iter()
    }

    /// Largest Euclidean norm of a frequency.
    pub fn max_norm(&self) -> f64 {
        self.frequencies.iter().map(|nu| norm(nu)).fold(0.0, f64::max)
    }

    /// Union of two spectra of the same dimension.
    pub fn union(&self, other: &Self) -> Result<Self> {
        Self::new(self.frequencies.iter().chain(&other.frequencies).cloned())
    }

    /// The spectrum without `±ν`.
    pub fn without(&self, nu: &[i64]) -> Result<Self> {
        let neg = negate(nu);
        Self::new(self.frequencies.iter().filter(|f| f.as_slice() != nu && **f != neg).cloned())
    }
}

impl TryFrom<Vec<Vec<i64>>> for SpectrumSet {
    type Error = Error;

    fn try_from(v: Vec<Vec<i64>>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<SpectrumSet> for Vec<Vec<i64>> {
    fn from(s: SpectrumSet) -> Self {
        s.frequencies.into_iter().collect()
    }
}

fn negate(nu: &[i64]) -> Vec<i64> {
    nu.iter().map(|c| -c).collect()
}

fn norm(nu: &[i64]) -> f64 {
    (nu.iter().map(|&c| (c * c) as f64).sum::<f64>()).sqrt()
}

/// `R(S) = Σ_{ν∈S} 1/(8|ν|)`: every ball of this radius meets the zero set
/// of any real polynomial with spectrum in `S`.
pub fn ko_radius(s: &SpectrumSet) -> f64 {
    s.iter().map(|nu| 1.0 / (8.0 * norm(nu))).sum()
}

/// Real trigonometric polynomial `Σ c(ν) e^{2πi⟨x,ν⟩}` with `c(−ν) = conj c(ν)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TrigPolynomial {
    dim: usize,
    coefficients: BTreeMap<Vec<i64>, Complex64>,
}

/// Relative tolerance on `c(−ν) = conj c(ν)`.
const HERMITIAN_TOLERANCE: f64 = 1e-12;

impl TrigPolynomial {
    pub fn new(dim: usize, coefficients: impl IntoIterator<Item = (Vec<i64>, Complex64)>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParameter("dimension must be at least 1".into()));
        }
        let mut map: BTreeMap<Vec<i64>, Complex64> = BTreeMap::new();
        for (nu, c) in coefficients {
            if nu.len() != dim {
                return Err(Error::InvalidParameter(format!("frequency {nu:?} is not in dimension {dim}")));
            }
            if !(c.re.is_finite() && c.im.is_finite()) {
                return Err(Error::InvalidParameter(format!("coefficient at {nu:?} is not finite")));
            }
            *map.entry(nu).or_default() += c;
        }
        map.retain(|_, c| *c != Complex64::new(0.0, 0.0));
        let scale = map.values().map(|c| c.norm()).fold(0.0, f64::max);
        for (nu, c) in &map {
            let partner = map.get(&negate(nu)).copied().unwrap_or_default();
            if (partner - c.conj()).norm() > HERMITIAN_TOLERANCE * scale {
                return Err(Error::InvalidParameter(format!(
                    "coefficients at {nu:?} and its negative are not conjugate, so the polynomial is not real"
                )));
            }
        }
        Ok(Self { dim, coefficients: map })
    }

    /// `Σ a_n cos(2πnx) + b_n sin(2πnx)` on the circle, from `(n, a_n, b_n)`.
    pub fn from_real(terms: impl IntoIterator<Item = (i64, f64, f64)>) -> Result<Self> {
        let mut out = Vec::new();
        for (n, a, b) in terms {
            if n == 0 {
                out.push((vec![0], Complex64::new(a, 0.0)));
            } else {
                let (n, b) = if n < 0 { (-n, -b) } else { (n, b) };
                out.push((vec![n], Complex64::new(a, -b) / 2.0));
                out.push((vec![-n], Complex64::new(a, b) / 2.0));
            }
        }
        Self::new(1, out)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn coefficients(&self) -> impl Iterator<Item = (&Vec<i64>, Complex64)> {
        self.coefficients.iter().map(|(nu, c)| (nu, *c))
    }

    pub fn coefficient(&self, nu: &[i64]) -> Complex64 {
        self.coefficients.get(nu).copied().unwrap_or_default()
    }

    /// `max |ν|` over the support.
    pub fn max_frequency(&self) -> f64 {
        self.coefficients.keys().map(|nu| norm(nu)).fold(0.0, f64::max)
    }

    /// `Σ |c(ν)|`, an upper bound for `sup |f|`.
    pub fn abs_sum(&self) -> f64 {
        self.coefficients.values().map(|c| c.norm()).sum()
    }

    /// `2π N_max Σ|c(ν)|`, an upper bound for `|∇f|`.
    pub fn derivative_bound(&self) -> f64 {
        2.0 * std::f64::consts::PI * self.max_frequency() * self.abs_sum()
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        let mut total = 0.0;
        for (nu, c) in &self.coefficients {
            let lead = nu.iter().find(|&&v| v != 0).copied().unwrap_or(0);
            if lead < 0 {
                continue;
            }
            let dot: f64 = nu.iter().zip(x).map(|(&n, &xi)| n as f64 * xi).sum();
            let (s, co) = sin_cos_turns(dot);
            if lead == 0 {
                total += c.re;
            } else {
                total += 2.0 * (c.re * co - c.im * s);
            }
        }
        total
    }

    /// The same function as an eigenfunction sum on the torus.
    pub fn to_eigen_sum(&self) -> Result<EigenSum> {
        let mut terms = Vec::new();
        for (nu, c) in &self.coefficients {
            let lead = nu.iter().find(|&&v| v != 0).copied().unwrap_or(0);
            match lead.cmp(&0) {
                std::cmp::Ordering::Less => {}
                std::cmp::Ordering::Equal => terms.push(Term::new(c.re, Mode::cos(nu.clone()))),
                std::cmp::Ordering::Greater => {
                    terms.push(Term::new(2.0 * c.re, Mode::cos(nu.clone())));
                    terms.push(Term::new(-2.0 * c.im, Mode::sin(nu.clone())));
                }
            }
        }
        EigenSum::torus(self.dim, terms)
    }

    /// Zeros on the circle: exact zeros at the `n` sample nodes `i/n` and
    /// bisected sign changes between them. Pairs of zeros closer than the
    /// sample spacing may be missed, which only lengthens the gaps found.
    pub fn circle_zeros(&self, n: usize) -> Result<Vec<f64>> {
        if self.dim != 1 {
            return Err(Error::InvalidParameter(format!("zeros on the circle need d = 1, got {}", self.dim)));
        }
        let minimum = (SAMPLES_PER_PERIOD as f64 * self.max_frequency()).ceil().max(SAMPLES_PER_PERIOD as f64) as usize;
        if n < minimum {
            return Err(Error::ResolutionRefused { given: n, minimum });
        }
        let f = |x: f64| self.eval(&[x]);
        let values: Vec<f64> = (0..n).map(|i| f(i as f64 / n as f64)).collect();
        let mut zeros = Vec::new();
        for i in 0..n {
            let (a, b) = (i as f64 / n as f64, (i + 1) as f64 / n as f64);
            let (fa, fb) = (values[i], values[(i + 1) % n]);
            if fa == 0.0 {
                zeros.push(a);
            } else if fa * fb < 0.0 {
                zeros.push(bisect(&f, a, b, fa));
            }
        }
        Ok(zeros)
    }
}

fn bisect(f: &impl Fn(f64) -> f64, mut a: f64, mut b: f64, mut fa: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if (fm < 0.0) == (fa < 0.0) {
            a = mid;
            fa = fm;
        } else {
            b = mid;
        }
    }
    0.5 * (a + b)
}

/// Largest circular gap between consecutive sorted points of `[0, 1)`; the
/// whole circle when there are none.
pub fn max_circular_gap(zeros: &[f64]) -> f64 {
    match zeros {
        [] => 1.0,
        [_] => 1.0,
        _ => {
            let inner = zeros.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max);
            inner.max(zeros[0] + 1.0 - zeros[zeros.len() - 1])
        }
    }
}

/// Real polynomial with spectrum contained in a gap spectrum `S`.
#[derive(Debug, Clone, PartialEq)]
pub struct GapPolynomial {
    spectrum: SpectrumSet,
    poly: TrigPolynomial,
}

impl GapPolynomial {
    pub fn new(spectrum: SpectrumSet, poly: TrigPolynomial) -> Result<Self> {
        if spectrum.dim() != poly.dim() {
            return Err(Error::InvalidParameter("spectrum and polynomial dimensions differ".into()));
        }
        if let Some((nu, _)) = poly.coefficients().find(|(nu, _)| !spectrum.contains(nu)) {
            return Err(Error::InvalidParameter(format!("frequency {nu:?} lies outside the spectrum")));
        }
        Ok(Self { spectrum, poly })
    }

    /// `Σ a_n cos(2πnx) + b_n sin(2πnx)` with spectrum `{±n}` over the terms given.
    pub fn from_real(terms: &[(i64, f64, f64)]) -> Result<Self> {
        let spectrum = SpectrumSet::symmetric(terms.iter().map(|t| t.0.abs()))?;
        Self::new(spectrum, TrigPolynomial::from_real(terms.iter().copied())?)
    }

    /// `cos(2πNx)`.
    pub fn cosine(n: i64) -> Result<Self> {
        Self::from_real(&[(n, 1.0, 0.0)])
    }

    pub fn spectrum(&self) -> &SpectrumSet {
        &self.spectrum
    }

    pub fn poly(&self) -> &TrigPolynomial {
        &self.poly
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.poly.eval(x)
    }

    /// Largest frequency norm in the spectrum.
    pub fn max_frequency(&self) -> f64 {
        self.spectrum.max_norm()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KoDensityReport {
    pub zeros: Vec<f64>,
    pub max_gap: f64,
    pub radius: f64,
    /// `2R(S) − max_gap`.
    pub margin: f64,
    pub passed: bool,
}

/// Checks on the circle that every closed arc of length `2R(S)` contains a
/// zero, i.e. that no gap between consecutive zeros exceeds `2R(S)`.
///
/// `grid` must give at least [`SAMPLES_PER_PERIOD`] samples per shortest
/// period of the spectrum.
pub fn verify_ko_density(p: &GapPolynomial, grid: usize) -> Result<KoDensityReport> {
    if p.spectrum.dim() != 1 {
        return Err(Error::InvalidParameter(format!("density check runs on the circle, got d = {}", p.spectrum.dim())));
    }
    let minimum = SAMPLES_PER_PERIOD * p.max_frequency().ceil() as usize;
    if grid < minimum.max(SAMPLES_PER_PERIOD) {
        return Err(Error::ResolutionRefused { given: grid, minimum: minimum.max(SAMPLES_PER_PERIOD) });
    }
    let zeros = p.poly.circle_zeros(grid)?;
    let max_gap = max_circular_gap(&zeros);
    let radius = ko_radius(&p.spectrum);
    let margin = 2.0 * radius - max_gap;
    Ok(KoDensityReport { passed: margin >= -ROOT_TOLERANCE, zeros, max_gap, radius, margin })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nodal;

    fn exact_zero_gap(n: i64) -> f64 {
        1.0 / (2.0 * n as f64)
    }

    #[test]
    fn radius_examples() {
        assert_eq!(ko_radius(&SpectrumSet::symmetric([1]).unwrap()), 0.25);
        assert_eq!(ko_radius(&SpectrumSet::symmetric([1, 2]).unwrap()), 0.375);
        for n in [3, 7, 64] {
            let r = ko_radius(&SpectrumSet::symmetric([n]).unwrap());
            assert!((r - 1.0 / (4.0 * n as f64)).abs() < 1e-16);
        }
        let s = SpectrumSet::new([vec![3, 4], vec![-3, -4]]).unwrap();
        assert!((ko_radius(&s) - 0.05).abs() < 1e-16);
    }

    #[test]
    fn spectrum_invariants() {
        assert!(SpectrumSet::new([vec![1]]).is_err());
        assert!(SpectrumSet::new([vec![0], vec![0]]).is_err());
        assert!(SpectrumSet::new(Vec::<Vec<i64>>::new()).is_err());
        assert!(SpectrumSet::band(0, 3).is_err());
        assert_eq!(SpectrumSet::band(2, 4).unwrap().len(), 6);
        let s: SpectrumSet = serde_json::from_str("[[1],[-1],[2],[-2]]").unwrap();
        assert_eq!(s, SpectrumSet::symmetric([1, 2]).unwrap());
        assert!(serde_json::from_str::<SpectrumSet>("[[1]]").is_err());
    }

    #[test]
    fn real_form_round_trip() {
        let p = TrigPolynomial::from_real([(1, 0.3, -0.7), (3, -1.1, 0.4)]).unwrap();
        for i in 0..50 {
            let x = i as f64 / 50.0;
            let want = 0.3 * (2.0 * std::f64::consts::PI * x).cos() - 0.7 * (2.0 * std::f64::consts::PI * x).sin()
                - 1.1 * (6.0 * std::f64::consts::PI * x).cos()
                + 0.4 * (6.0 * std::f64::consts::PI * x).sin();
            assert!((p.eval(&[x]) - want).abs() < 1e-14);
            assert!((p.to_eigen_sum().unwrap().eval(&[x]).unwrap() - want).abs() < 1e-14);
        }
        assert!((p.abs_sum() - (0.3f64.hypot(0.7) + 1.1f64.hypot(0.4))).abs() < 1e-15);
    }

    #[test]
    fn non_hermitian_rejected() {
        let c = Complex64::new(1.0, 0.0);
        assert!(TrigPolynomial::new(1, [(vec![1], c)]).is_err());
        assert!(TrigPolynomial::new(1, [(vec![1], c), (vec![-1], c)]).is_ok());
        let s = SpectrumSet::symmetric([2]).unwrap();
        let p = TrigPolynomial::from_real([(1, 1.0, 0.0)]).unwrap();
        assert!(GapPolynomial::new(s, p).is_err());
    }

    #[test]
    fn cosine_zeros_are_boundary_tight() {
        let r = verify_ko_density(&GapPolynomial::cosine(1).unwrap(), 64).unwrap();
        assert_eq!(r.zeros.len(), 2);
        assert!((r.zeros[0] - 0.25).abs() < 1e-15 && (r.zeros[1] - 0.75).abs() < 1e-15);
        assert!((r.max_gap - 0.5).abs() < 1e-15);
        assert!(r.passed);
        for n in [2, 5, 17] {
            let r = verify_ko_density(&GapPolynomial::cosine(n).unwrap(), 16 * n as usize + 3).unwrap();
            assert!((r.max_gap - exact_zero_gap(n)).abs() < 1e-13);
            assert!(r.passed);
        }
    }

    #[test]
    fn two_frequency_gap_matches_bisection_oracle() {
        // roots of cos(2πx)+cos(4πx) = 2cos(3πx)cos(πx): x = 1/6, 1/2, 5/6
        let p = GapPolynomial::from_real(&[(1, 1.0, 0.0), (2, 1.0, 0.0)]).unwrap();
        let r = verify_ko_density(&p, 128).unwrap();
        assert_eq!(r.zeros.len(), 3);
        assert!((r.max_gap - 1.0 / 3.0).abs() < 1e-14);
        assert!(r.max_gap <= 2.0 * 0.375);
        assert!(r.passed);
    }

    #[test]
    fn coarse_grid_refused() {
        let p = GapPolynomial::cosine(8).unwrap();
        assert_eq!(verify_ko_density(&p, 100), Err(Error::ResolutionRefused { given: 100, minimum: 128 }));
    }

    #[test]
    fn zeros_agree_with_nodal_extraction() {
        let p = TrigPolynomial::from_real([(3, 1.0, 0.2), (5, -0.4, 0.9)]).unwrap();
        let ours = p.circle_zeros(400).unwrap();
        let sum = p.to_eigen_sum().unwrap();
        let field = nodal::sample(&sum, 400).unwrap();
        let zs = nodal::extract_zero_set(&field).unwrap();
        let mut theirs: Vec<f64> = zs.all_points().into_iter().map(|v| v[0].rem_euclid(1.0)).collect();
        theirs.sort_by(f64::total_cmp);
        assert_eq!(ours.len(), theirs.len());
        for (a, b) in ours.iter().zip(&theirs) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn circular_gap() {
        assert_eq!(max_circular_gap(&[]), 1.0);
        assert!((max_circular_gap(&[0.1, 0.2, 0.9]) - 0.7).abs() < 1e-15);
        assert!((max_circular_gap(&[0.05, 0.5, 0.7]) - 0.45).abs() < 1e-15);
    }
}
