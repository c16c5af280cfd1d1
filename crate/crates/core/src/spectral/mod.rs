//! Exact eigenfunction sums on the flat torus `T^d = [0,1)^d` and the round
//! sphere S², with their spectral calculus.
//!
//! Torus modes are `cos(2π⟨ν,x⟩)` and `sin(2π⟨ν,x⟩)` with eigenvalue
//! `4π²|ν|²`. Sphere modes are the real orthonormal harmonics `Y_k^q` of
//! [`sphere`] with eigenvalue `k(k+1)`. Every serialized sum carries its
//! convention string so the two normalizations of torus eigenvalues (`4π²|ν|²`
//! here, lattice `|ν|²` in [`crate::gap`]) are never mixed.

mod fd;
pub mod sphere;

use std::collections::BTreeMap;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Convention label attached to torus sums.
pub const TORUS_CONVENTION: &str =
    "torus [0,1)^d; modes cos/sin(2*pi*<nu,x>); lambda = 4*pi^2*|nu|^2";
/// Convention label attached to sphere sums.
pub const SPHERE_CONVENTION: &str =
    "sphere S^2; real orthonormal Y_k^q, no Condon-Shortley phase; lambda = k(k+1)";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Manifold {
    Torus { dim: usize },
    Sphere,
}

impl Manifold {
    pub fn convention(&self) -> &'static str {
        match self {
            Manifold::Torus { .. } => TORUS_CONVENTION,
            Manifold::Sphere => SPHERE_CONVENTION,
        }
    }

    /// Intrinsic dimension.
    pub fn dim(&self) -> usize {
        match self {
            Manifold::Torus { dim } => *dim,
            Manifold::Sphere => 2,
        }
    }
}

/// Lattice frequency `ν ∈ ℤ^d` of a torus mode.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FrequencyVector(pub Vec<i64>);

impl FrequencyVector {
    pub fn new(components: impl Into<Vec<i64>>) -> Self {
        Self(components.into())
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn norm_sq(&self) -> i64 {
        self.0.iter().map(|c| c * c).sum()
    }

    pub fn norm(&self) -> f64 {
        (self.norm_sq() as f64).sqrt()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&c| c == 0)
    }

    /// Laplace eigenvalue `4π²|ν|²` of the modes with this frequency.
    pub fn eigenvalue(&self) -> f64 {
        4.0 * PI * PI * self.norm_sq() as f64
    }

    pub fn neg(&self) -> Self {
        Self(self.0.iter().map(|c| -c).collect())
    }

    /// Representative of `{ν, -ν}` whose first nonzero component is positive,
    /// with the sign flip that maps `ν` onto it.
    fn canonical(&self) -> (Self, f64) {
        match self.0.iter().find(|&&c| c != 0) {
            Some(&c) if c < 0 => (self.neg(), -1.0),
            _ => (self.clone(), 1.0),
        }
    }

    /// `(sin, cos)` of `2π⟨ν,x⟩`.
    fn sin_cos(&self, x: &[f64]) -> (f64, f64) {
        let dot: f64 = self.0.iter().zip(x).map(|(&n, &xi)| n as f64 * xi).sum();
        sin_cos_turns(dot)
    }
}

/// `(sin 2πs, cos 2πs)` with the argument reduced to a quarter turn first, so
/// that values near the zeros keep full relative accuracy.
pub fn sin_cos_turns(s: f64) -> (f64, f64) {
    let r = s - s.floor();
    let q = (4.0 * r).round();
    let (sn, cs) = (2.0 * PI * (r - 0.25 * q)).sin_cos();
    match q as i64 {
        1 => (cs, -sn),
        2 => (-sn, -cs),
        3 => (-cs, sn),
        _ => (sn, cs),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Parity {
    Cos,
    Sin,
}

/// One basis eigenfunction.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Mode {
    Torus { nu: FrequencyVector, parity: Parity },
    Sphere { degree: u32, order: i32 },
}

impl Mode {
    pub fn cos(nu: impl Into<Vec<i64>>) -> Self {
        Mode::Torus { nu: FrequencyVector::new(nu), parity: Parity::Cos }
    }

    pub fn sin(nu: impl Into<Vec<i64>>) -> Self {
        Mode::Torus { nu: FrequencyVector::new(nu), parity: Parity::Sin }
    }

    pub fn harmonic(degree: u32, order: i32) -> Self {
        Mode::Sphere { degree, order }
    }

    pub fn eigenvalue(&self) -> f64 {
        match self {
            Mode::Torus { nu, .. } => nu.eigenvalue(),
            Mode::Sphere { degree, .. } => {
                let k = *degree as f64;
                k * (k + 1.0)
            }
        }
    }

    /// Integer label that is equal exactly when the eigenvalues are equal.
    pub fn eigen_key(&self) -> u64 {
        match self {
            Mode::Torus { nu, .. } => nu.norm_sq() as u64,
            Mode::Sphere { degree, .. } => *degree as u64,
        }
    }

    /// Squared L² norm of the basis function on its manifold.
    pub fn norm_sq(&self) -> f64 {
        match self {
            Mode::Torus { nu, .. } if nu.is_zero() => 1.0,
            Mode::Torus { .. } => 0.5,
            Mode::Sphere { .. } => 1.0,
        }
    }

    fn eval(&self, point: &[f64], unit: Option<[f64; 3]>) -> f64 {
        match self {
            Mode::Torus { nu, parity } => {
                let (sn, cs) = nu.sin_cos(point);
                match parity {
                    Parity::Cos => cs,
                    Parity::Sin => sn,
                }
            }
            Mode::Sphere { degree, order } => {
                sphere::real_harmonic(*degree, *order, unit.expect("validated unit point"))
            }
        }
    }
}

/// A term `a · φ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub a: f64,
    pub mode: Mode,
}

impl Term {
    pub fn new(a: f64, mode: Mode) -> Self {
        Self { a, mode }
    }
}

/// A finite real combination `f = Σ a_j φ_j` of eigenfunctions.
///
/// Terms are canonical (torus frequencies modulo `ν ↦ -ν`, duplicates merged)
/// and sorted by ascending eigenvalue at construction. Zero coefficients are
/// kept so that spectral operators preserve the term structure.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenSum {
    manifold: Manifold,
    terms: Vec<Term>,
}

impl EigenSum {
    pub fn new(manifold: Manifold, terms: Vec<Term>) -> Result<Self> {
        if terms.is_empty() {
            return Err(Error::EmptySum);
        }
        if let Manifold::Torus { dim } = manifold {
            if dim == 0 {
                return Err(Error::InvalidParameter("torus dimension must be >= 1".into()));
            }
        }
        let mut merged: BTreeMap<(u64, Mode), f64> = BTreeMap::new();
        for t in terms {
            if !t.a.is_finite() {
                return Err(Error::InvalidParameter(format!("coefficient {} not finite", t.a)));
            }
            let (mode, sign) = match (&manifold, t.mode) {
                (Manifold::Torus { dim }, Mode::Torus { nu, parity }) => {
                    if nu.dim() != *dim {
                        return Err(Error::ManifoldMismatch(format!(
                            "frequency {:?} on a {dim}-torus",
                            nu.0
                        )));
                    }
                    if parity == Parity::Sin && nu.is_zero() {
                        // sin(0) vanishes identically
                        continue;
                    }
                    let (c, s) = nu.canonical();
                    let s = if parity == Parity::Sin { s } else { 1.0 };
                    (Mode::Torus { nu: c, parity }, s)
                }
                (Manifold::Sphere, Mode::Sphere { degree, order }) => {
                    if order.unsigned_abs() > degree {
                        return Err(Error::InvalidParameter(format!(
                            "harmonic order {order} exceeds degree {degree}"
                        )));
                    }
                    (Mode::Sphere { degree, order }, 1.0)
                }
                (m, mode) => {
                    return Err(Error::ManifoldMismatch(format!("{mode:?} on {m:?}")));
                }
            };
            *merged.entry((mode.eigen_key(), mode)).or_insert(0.0) += sign * t.a;
        }
        if merged.is_empty() {
            return Err(Error::EmptySum);
        }
        let terms = merged.into_iter().map(|((_, mode), a)| Term { a, mode }).collect();
        Ok(Self { manifold, terms })
    }

    pub fn torus(dim: usize, terms: Vec<Term>) -> Result<Self> {
        Self::new(Manifold::Torus { dim }, terms)
    }

    pub fn sphere(terms: Vec<Term>) -> Result<Self> {
        Self::new(Manifold::Sphere, terms)
    }

    /// `a·sin(2π n x)` on the circle.
    pub fn sine(n: i64, a: f64) -> Self {
        Self::torus(1, vec![Term::new(a, Mode::sin([n]))]).expect("valid single sine")
    }

    pub fn manifold(&self) -> Manifold {
        self.manifold
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    /// Distinct eigenvalues, ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut out: Vec<f64> = Vec::new();
        let mut last = None;
        for t in &self.terms {
            let key = t.mode.eigen_key();
            if last != Some(key) {
                out.push(t.mode.eigenvalue());
                last = Some(key);
            }
        }
        out
    }

    /// Number of distinct eigenvalues.
    pub fn m(&self) -> usize {
        self.eigenvalues().len()
    }

    pub fn lambda1(&self) -> f64 {
        self.terms[0].mode.eigenvalue()
    }

    pub fn lambda_max(&self) -> f64 {
        self.terms[self.terms.len() - 1].mode.eigenvalue()
    }

    /// Integer label of the largest eigenvalue: `|ν|²` or the degree `k`.
    pub fn max_eigen_key(&self) -> u64 {
        self.terms[self.terms.len() - 1].mode.eigen_key()
    }

    pub fn max_abs_coefficient(&self) -> f64 {
        self.terms.iter().map(|t| t.a.abs()).fold(0.0, f64::max)
    }

    /// Largest lattice component `max |ν_i|` (torus) or degree (sphere).
    pub fn max_frequency(&self) -> u64 {
        self.terms
            .iter()
            .map(|t| match &t.mode {
                Mode::Torus { nu, .. } => nu.0.iter().map(|c| c.unsigned_abs()).max().unwrap_or(0),
                Mode::Sphere { degree, .. } => *degree as u64,
            })
            .max()
            .unwrap_or(0)
    }

    /// `Σ a_j² ‖φ_j‖²`, the exact squared L² norm.
    pub fn l2_norm_sq(&self) -> f64 {
        self.terms.iter().map(|t| t.a * t.a * t.mode.norm_sq()).sum()
    }

    pub fn scaled(&self, s: f64) -> Self {
        let mut out = self.clone();
        out.terms.iter_mut().for_each(|t| t.a *= s);
        out
    }

    /// Sum of two eigenfunction sums on the same manifold.
    pub fn plus(&self, other: &EigenSum) -> Result<Self> {
        if self.manifold != other.manifold {
            return Err(Error::ManifoldMismatch(format!(
                "{:?} + {:?}",
                self.manifold, other.manifold
            )));
        }
        let terms = self.terms.iter().chain(&other.terms).cloned().collect();
        Self::new(self.manifold, terms)
    }

    /// Point value. Torus coordinates are read modulo 1; sphere points must
    /// be unit 3-vectors within [`sphere::UNIT_TOLERANCE`].
    pub fn eval(&self, point: &[f64]) -> Result<f64> {
        let unit = match self.manifold {
            Manifold::Torus { dim } => {
                if point.len() != dim || point.iter().any(|x| !x.is_finite()) {
                    return Err(Error::OffManifold(format!(
                        "torus point {point:?} for dimension {dim}"
                    )));
                }
                None
            }
            Manifold::Sphere => Some(sphere::check_unit(point)?),
        };
        Ok(self.terms.iter().map(|t| t.a * t.mode.eval(point, unit)).sum())
    }

    /// Exact action of `∏_k (Δ + γ_k)`: coefficient `a_j ↦ a_j ∏_k (γ_k − λ_j)`.
    pub fn apply_product_operator(&self, gammas: &[f64]) -> EigenSum {
        let mut out = self.clone();
        for t in &mut out.terms {
            let lam = t.mode.eigenvalue();
            t.a *= gammas.iter().map(|g| g - lam).product::<f64>();
        }
        out
    }

    /// `h(x, t) = f(x) e^{√λ₁ t}` on `M × ℝ`.
    pub fn extend(&self) -> Result<ExtendedFunction> {
        let l1 = self.lambda1();
        if l1 <= 0.0 {
            return Err(Error::NonPositiveEigenvalue(l1));
        }
        Ok(ExtendedFunction { base: self.clone(), mu: l1.sqrt() })
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string(self).map_err(|e| Error::Serialization(e.to_string()))
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Serialization(e.to_string()))
    }
}

#[derive(Serialize, Deserialize)]
struct EigenSumRecord {
    manifold: Manifold,
    convention: String,
    terms: Vec<Term>,
}

impl Serialize for EigenSum {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        EigenSumRecord {
            manifold: self.manifold,
            convention: self.manifold.convention().to_string(),
            terms: self.terms.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for EigenSum {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rec = EigenSumRecord::deserialize(d)?;
        if rec.convention != rec.manifold.convention() {
            return Err(serde::de::Error::custom(format!(
                "convention mismatch: {:?}",
                rec.convention
            )));
        }
        EigenSum::new(rec.manifold, rec.terms).map_err(serde::de::Error::custom)
    }
}

/// Zonal harmonic of degree `k` about `pole`, L²-normalized, expanded in the
/// `Y_k^q` basis by the addition theorem. Returns the sum and its peak value
/// `d_k = Z_k(pole) = √((2k+1)/4π)`.
pub fn zonal_harmonic(k: u32, pole: [f64; 3]) -> Result<(EigenSum, f64)> {
    let pole = sphere::check_unit(&pole)?;
    let scale = (4.0 * PI / (2 * k + 1) as f64).sqrt();
    let mut terms = Vec::new();
    for q in -(k as i32)..=(k as i32) {
        let c = scale * sphere::real_harmonic(k, q, pole);
        if c != 0.0 || q == 0 {
            terms.push(Term::new(c, Mode::harmonic(k, q)));
        }
    }
    let peak = ((2 * k + 1) as f64 / (4.0 * PI)).sqrt();
    Ok((EigenSum::sphere(terms)?, peak))
}

/// `Z_k − c·(d_k/d_n) Z_n`, which vanishes at the pole when `c = 1`.
pub fn isolated_zero_example_scaled(k: u32, n: u32, pole: [f64; 3], c: f64) -> Result<EigenSum> {
    if k >= n {
        return Err(Error::InvalidParameter(format!("need k < n, got k={k}, n={n}")));
    }
    let (zk, dk) = zonal_harmonic(k, pole)?;
    let (zn, dn) = zonal_harmonic(n, pole)?;
    zk.plus(&zn.scaled(-c * dk / dn))
}

/// `Z_k − (d_k/d_n) Z_n`: an eigenfunction sum with an isolated zero at `pole`.
pub fn isolated_zero_example(k: u32, n: u32, pole: [f64; 3]) -> Result<EigenSum> {
    isolated_zero_example_scaled(k, n, pole, 1.0)
}

/// `h(x,t) = f(x) e^{μ t}` on `M × ℝ`. [`EigenSum::extend`] sets `μ = √λ₁`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtendedFunction {
    base: EigenSum,
    mu: f64,
}

impl ExtendedFunction {
    /// Extension with an arbitrary growth rate, e.g. to perturb `μ`.
    pub fn with_growth_rate(base: EigenSum, mu: f64) -> Self {
        Self { base, mu }
    }

    pub fn base(&self) -> &EigenSum {
        &self.base
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn eval(&self, x: &[f64], t: f64) -> Result<f64> {
        Ok(self.base.eval(x)? * (self.mu * t).exp())
    }

    /// Shifts `c_k = λ_k − λ₁` of the operator `Δ ∏_{k≥2}(Δ + c_k)` on `M × ℝ`,
    /// over distinct eigenvalues.
    pub fn operator_shifts(&self) -> Vec<f64> {
        let lams = self.base.eigenvalues();
        lams.iter().skip(1).map(|l| l - lams[0]).collect()
    }

    /// Per-term annihilation factors `|a_j| · |(μ² − λ_j) ∏_{k≥2}(μ² − λ_j + λ_k − λ₁)|`.
    ///
    /// Each `φ_j e^{μt}` is an eigenfunction of `Δ_{M×ℝ}` with eigenvalue
    /// `λ_j − μ²`, so with `μ² = λ₁` every factor vanishes.
    pub fn term_residuals(&self) -> Vec<f64> {
        let mu2 = self.mu * self.mu;
        let shifts = self.operator_shifts();
        self.base
            .terms
            .iter()
            .map(|t| {
                let s = mu2 - t.mode.eigenvalue();
                let f = s * shifts.iter().map(|c| s + c).product::<f64>();
                (t.a * f).abs()
            })
            .collect()
    }

    /// Max over terms of the exact annihilation factor.
    pub fn product_residual_exact(&self) -> f64 {
        self.term_residuals().into_iter().fold(0.0, f64::max)
    }

    /// Roundoff scale of the exact residual: the same product with every
    /// difference replaced by the sum of magnitudes.
    pub fn residual_scale(&self) -> f64 {
        let mu2 = self.mu * self.mu;
        let shifts = self.operator_shifts();
        self.base
            .terms
            .iter()
            .map(|t| {
                let s = mu2 + t.mode.eigenvalue();
                (t.a * s * shifts.iter().map(|c| s + c.abs()).product::<f64>()).abs()
            })
            .fold(0.0, f64::max)
    }

    /// Residual of `Δ ∏_{k≥2}(Δ + λ_k − λ₁) h` at `(x, t)` with nested central
    /// differences of spacing `step` in every coordinate of `T^d × ℝ`.
    pub fn product_residual_fd(&self, x: &[f64], t: f64, step: f64) -> Result<f64> {
        fd::product_residual(self, x, t, step)
    }
}

pub use fd::{FD_MAX_ORDER, FD_MIN_STEP};

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn t2(terms: Vec<Term>) -> EigenSum {
        EigenSum::torus(2, terms).unwrap()
    }

    #[test]
    fn eval_examples() {
        let f = EigenSum::sine(1, 1.0);
        assert!((f.eval(&[0.25]).unwrap() - 1.0).abs() < 1e-15);

        let (y10, _) = zonal_harmonic(1, [0.0, 0.0, 1.0]).unwrap();
        let want = (3.0 / (4.0 * PI)).sqrt();
        assert!((y10.eval(&[0.0, 0.0, 1.0]).unwrap() - want).abs() < 1e-14);
        assert!((want - 0.48860).abs() < 1e-5);

        let g = t2(vec![Term::new(1.0, Mode::sin([1, 0])), Term::new(1.0, Mode::sin([0, 1]))]);
        assert!(g.eval(&[0.5, 0.5]).unwrap().abs() < 1e-15);
    }

    #[test]
    fn quarter_turn_reduction() {
        for i in -40..40 {
            let s = i as f64 * 0.0371;
            let (sn, cs) = sin_cos_turns(s);
            assert!((sn - (2.0 * PI * s).sin()).abs() < 1e-13);
            assert!((cs - (2.0 * PI * s).cos()).abs() < 1e-13);
        }
        assert_eq!(sin_cos_turns(0.5).0, 0.0);
        assert_eq!(sin_cos_turns(0.75), (-1.0, 0.0));
        // relative accuracy near a zero
        let d = 1e-9;
        assert!((sin_cos_turns(0.5 + d).0 / (-2.0 * PI * d) - 1.0).abs() < 1e-6);
    }

    #[test]
    fn eval_errors() {
        let (y, _) = zonal_harmonic(2, [0.0, 0.0, 1.0]).unwrap();
        assert!(matches!(y.eval(&[0.0, 0.0, 1.1]), Err(Error::OffManifold(_))));
        assert!(matches!(EigenSum::torus(1, vec![]), Err(Error::EmptySum)));
        assert!(EigenSum::sine(1, 1.0).eval(&[0.1, 0.2]).is_err());
    }

    #[test]
    fn canonicalization_merges_opposite_frequencies() {
        let f = EigenSum::torus(
            1,
            vec![
                Term::new(1.0, Mode::cos([2])),
                Term::new(0.5, Mode::cos([-2])),
                Term::new(1.0, Mode::sin([-3])),
            ],
        )
        .unwrap();
        assert_eq!(f.terms().len(), 2);
        assert_eq!(f.terms()[0], Term::new(1.5, Mode::cos([2])));
        assert_eq!(f.terms()[1], Term::new(-1.0, Mode::sin([3])));
        assert!((f.eval(&[0.1]).unwrap()
            - (1.5 * (4.0 * PI * 0.1).cos() - (6.0 * PI * 0.1).sin()))
            .abs()
            < 1e-14);
    }

    #[test]
    fn eigenvalues_sorted_with_ties() {
        let f = t2(vec![
            Term::new(1.0, Mode::cos([3, 0])),
            Term::new(1.0, Mode::cos([1, 1])),
            Term::new(1.0, Mode::sin([1, -1])),
            Term::new(1.0, Mode::cos([0, 1])),
        ]);
        let l = f.eigenvalues();
        assert_eq!(l.len(), 3);
        assert!(l.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(f.m(), 3);
        assert!((f.lambda1() - 4.0 * PI * PI).abs() < 1e-12);
    }

    #[test]
    fn product_operator_examples() {
        let lam = 4.0 * PI * PI;
        let f = EigenSum::sine(1, 2.0);
        let z = f.apply_product_operator(&[lam]);
        assert_eq!(z.terms()[0].a, 0.0);

        let g = EigenSum::torus(1, vec![Term::new(1.0, Mode::sin([1])), Term::new(0.3, Mode::cos([2]))])
            .unwrap();
        let z = g.apply_product_operator(&g.eigenvalues());
        assert!(z.terms().iter().all(|t| t.a == 0.0));

        let s = f.apply_product_operator(&[0.0]);
        assert!((s.terms()[0].a - (-lam * 2.0)).abs() < 1e-12);
    }

    #[test]
    fn extend_examples() {
        let f = EigenSum::sine(1, 1.0);
        let h = f.extend().unwrap();
        assert!((h.mu() - 2.0 * PI).abs() < 1e-15);
        assert!(h.product_residual_exact() <= 1e-12 * h.residual_scale());
        for &x in &[0.1, 0.37, 0.8] {
            assert_eq!(h.eval(&[x], 0.0).unwrap(), f.eval(&[x]).unwrap());
        }
        let c = EigenSum::torus(1, vec![Term::new(1.0, Mode::cos([0]))]).unwrap();
        assert!(matches!(c.extend(), Err(Error::NonPositiveEigenvalue(_))));
    }

    #[test]
    fn residual_exact_examples() {
        // m = 2 with λ1 < λ2 vanishes; perturbing μ does not.
        let f = EigenSum::torus(1, vec![Term::new(1.0, Mode::sin([1])), Term::new(0.5, Mode::sin([2]))])
            .unwrap();
        let h = f.extend().unwrap();
        assert!(h.product_residual_exact() <= 1e-12 * h.residual_scale());
        let bad = ExtendedFunction::with_growth_rate(f.clone(), h.mu() + 0.1);
        // direct evaluation of the factor for the sin(2πx) term:
        // s = (μ+0.1)² − λ1, factor s(s + λ2 − λ1)
        let lam1 = 4.0 * PI * PI;
        let s = (h.mu() + 0.1).powi(2) - lam1;
        let want = (s * (s + 3.0 * lam1)).abs();
        assert!(bad.product_residual_exact() >= want * (1.0 - 1e-12));
        assert!(bad.product_residual_exact() > 1.0);
    }

    #[test]
    fn zonal_examples() {
        let north = [0.0, 0.0, 1.0];
        let (z0, d0) = zonal_harmonic(0, north).unwrap();
        assert!((d0 - 0.28209).abs() < 1e-5);
        assert!((z0.eval(&[1.0, 0.0, 0.0]).unwrap() - d0).abs() < 1e-15);
        let (_, d2) = zonal_harmonic(2, north).unwrap();
        assert!((d2 - (5.0 / (4.0 * PI)).sqrt()).abs() < 1e-15);
        assert!((d2 - 0.63078).abs() < 1e-5);
        // growth d_k/√k → √(2/4π)
        let (_, d) = zonal_harmonic(4000, north).unwrap();
        assert!((d / 4000f64.sqrt() - (2.0 / (4.0 * PI)).sqrt()).abs() < 1e-4);
        // strictly increasing peaks
        let peaks: Vec<f64> = (0..30).map(|k| zonal_harmonic(k, north).unwrap().1).collect();
        assert!(peaks.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn zonal_about_tilted_pole_peaks_there() {
        let pole = sphere::from_angles(0.7, 2.1);
        for k in 0..8 {
            let (z, d) = zonal_harmonic(k, pole).unwrap();
            assert!((z.eval(&pole).unwrap() - d).abs() < 1e-12);
            // rotation invariance: value depends only on the angle to the pole
            let p = sphere::from_angles(0.3, 0.5);
            let t = pole.iter().zip(&p).map(|(a, b)| a * b).sum::<f64>();
            let want = d * sphere::legendre(k, t);
            assert!((z.eval(&p).unwrap() - want).abs() < 1e-12);
            assert!((z.l2_norm_sq() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn isolated_zero_examples() {
        let pole = [0.0, 0.0, 1.0];
        let f = isolated_zero_example(2, 5, pole).unwrap();
        assert!(f.eval(&pole).unwrap().abs() < 1e-12);
        let (_, d2) = zonal_harmonic(2, pole).unwrap();
        let eps = 0.01;
        let g = isolated_zero_example_scaled(2, 5, pole, 1.0 + eps).unwrap();
        assert!((g.eval(&pole).unwrap() + eps * d2).abs() < 1e-12);
        let h = isolated_zero_example(0, 1, pole).unwrap();
        assert!(h.eval(&pole).unwrap().abs() < 1e-15);
        assert!(isolated_zero_example(5, 5, pole).is_err());

        let tilted = sphere::from_angles(1.0, -0.4);
        let f = isolated_zero_example(2, 5, tilted).unwrap();
        assert!(f.eval(&tilted).unwrap().abs() < 1e-12);
    }

    #[test]
    fn json_round_trip_is_bit_exact() {
        let f = t2(vec![
            Term::new(0.1 + 0.2, Mode::cos([1, 2])),
            Term::new(-1.0 / 3.0, Mode::sin([0, 5])),
        ]);
        let s = f.to_json().unwrap();
        assert!(s.contains("\"convention\""));
        let g = EigenSum::from_json(&s).unwrap();
        assert_eq!(f, g);
        assert!(EigenSum::from_json(&s.replace("4*pi^2", "pi")).is_err());
    }

    fn torus_sum_strategy() -> impl Strategy<Value = EigenSum> {
        prop::collection::vec(
            ((-6i64..=6, -6i64..=6), prop::bool::ANY, -2.0f64..2.0),
            1..8,
        )
        .prop_filter_map("non-empty", |v| {
            let terms = v
                .into_iter()
                .map(|((a, b), s, c)| Term::new(c, if s { Mode::sin([a, b]) } else { Mode::cos([a, b]) }))
                .collect();
            EigenSum::torus(2, terms).ok()
        })
    }

    proptest! {
        #[test]
        fn torus_sums_are_periodic(f in torus_sum_strategy(), x in 0.0f64..1.0, y in 0.0f64..1.0) {
            let v = f.eval(&[x, y]).unwrap();
            prop_assert!((v - f.eval(&[x + 1.0, y]).unwrap()).abs() < 1e-12);
            prop_assert!((v - f.eval(&[x, y + 1.0]).unwrap()).abs() < 1e-12);
        }

        #[test]
        fn own_spectrum_annihilates(f in torus_sum_strategy()) {
            let lams = f.eigenvalues();
            let z = f.apply_product_operator(&lams);
            let lm = f.lambda_max();
            let scale = f.max_abs_coefficient() * lams.iter().map(|l| lm + l).product::<f64>();
            for t in z.terms() {
                prop_assert!(t.a.abs() <= 1e-12 * scale);
            }
        }

        #[test]
        fn json_round_trip(f in torus_sum_strategy()) {
            prop_assert_eq!(EigenSum::from_json(&f.to_json().unwrap()).unwrap(), f);
        }
    }

    #[test]
    fn parseval_on_grid() {
        // bandlimit 32 on a 256² grid
        let f = t2(vec![
            Term::new(0.7, Mode::cos([32, 0])),
            Term::new(-1.2, Mode::sin([5, 17])),
            Term::new(0.4, Mode::cos([0, 0])),
            Term::new(2.0, Mode::sin([1, 1])),
            Term::new(0.3, Mode::cos([20, -31])),
        ]);
        let n = 256;
        let mut acc = 0.0;
        for i in 0..n {
            for j in 0..n {
                let v = f.eval(&[i as f64 / n as f64, j as f64 / n as f64]).unwrap();
                acc += v * v;
            }
        }
        acc /= (n * n) as f64;
        assert!((acc - f.l2_norm_sq()).abs() / f.l2_norm_sq() < 1e-6);
    }
}
