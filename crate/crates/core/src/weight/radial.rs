//! Finite sums `Σ c_i ρ^{p_i}` of radial powers in `ℝ^d`, `ρ = |x|`, with
//! exact radial calculus.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Exponents closer than this (relative to `max(1,|p|)`) are merged.
pub const EXPONENT_MERGE: f64 = 1e-12;
/// A merged coefficient is dropped when it cancels to this fraction of the
/// largest contribution.
pub const CANCELLATION_DROP: f64 = 1e-15;

fn same_exponent(p: f64, q: f64) -> bool {
    (p - q).abs() <= EXPONENT_MERGE * p.abs().max(1.0)
}

/// `ρ^p`, exact for integer exponents.
pub(crate) fn rpow(rho: f64, p: f64) -> f64 {
    if p == p.trunc() && p.abs() < 1024.0 {
        rho.powi(p as i32)
    } else {
        rho.powf(p)
    }
}

/// `Σ c_i |x|^{p_i}` on `ℝ^d`, terms sorted by ascending exponent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialExpansion {
    d: usize,
    terms: Vec<(f64, f64)>,
}

impl RadialExpansion {
    /// Builds an expansion from `(coefficient, exponent)` pairs, merging
    /// equal exponents.
    pub fn new(d: usize, terms: impl IntoIterator<Item = (f64, f64)>) -> Self {
        let mut raw: Vec<(f64, f64)> = terms.into_iter().filter(|t| t.0 != 0.0).collect();
        raw.sort_by(|a, b| a.1.total_cmp(&b.1));
        let mut out: Vec<(f64, f64)> = Vec::with_capacity(raw.len());
        let mut scale = 0.0f64;
        for (c, p) in raw {
            match out.last_mut() {
                Some(last) if same_exponent(last.1, p) => {
                    scale = scale.max(c.abs());
                    last.0 += c;
                }
                _ => {
                    if let Some(last) = out.last() {
                        if last.0.abs() <= CANCELLATION_DROP * scale {
                            out.pop();
                        }
                    }
                    scale = c.abs();
                    out.push((c, p));
                }
            }
        }
        if let Some(last) = out.last() {
            if last.0.abs() <= CANCELLATION_DROP * scale {
                out.pop();
            }
        }
        Self { d, terms: out }
    }

    pub fn zero(d: usize) -> Self {
        Self { d, terms: Vec::new() }
    }

    /// `c |x|^p`.
    pub fn monomial(d: usize, c: f64, p: f64) -> Self {
        Self::new(d, [(c, p)])
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    /// `(coefficient, exponent)` pairs, ascending exponent.
    pub fn terms(&self) -> &[(f64, f64)] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, p: f64) -> f64 {
        self.terms.iter().find(|t| same_exponent(t.1, p)).map_or(0.0, |t| t.0)
    }

    fn singular(&self) -> bool {
        self.terms.iter().any(|t| t.1 < 0.0)
    }

    /// Value at radius `rho`; `rho = 0` is allowed only without negative exponents.
    pub fn eval(&self, rho: f64) -> Result<f64> {
        if !(rho >= 0.0) || (rho == 0.0 && self.singular()) {
            return Err(Error::InvalidParameter(format!("radius {rho} outside the domain")));
        }
        Ok(self.at(rho))
    }

    /// Value at `rho > 0` without domain checks.
    pub fn at(&self, rho: f64) -> f64 {
        self.terms.iter().map(|&(c, p)| c * rpow(rho, p)).sum()
    }

    /// `Σ |c_i| ρ^{p_i}`: the scale against which roundoff in [`Self::at`] is measured.
    pub fn abs_at(&self, rho: f64) -> f64 {
        self.terms.iter().map(|&(c, p)| c.abs() * rpow(rho, p)).sum()
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self::new(self.d, self.terms.iter().map(|&(c, p)| (s * c, p)))
    }

    pub fn add(&self, other: &Self) -> Self {
        Self::new(self.d, self.terms.iter().chain(&other.terms).copied())
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scaled(-1.0))
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut prod = Vec::with_capacity(self.terms.len() * other.terms.len());
        for &(a, p) in &self.terms {
            for &(b, q) in &other.terms {
                prod.push((a * b, p + q));
            }
        }
        Self::new(self.d, prod)
    }

    /// `j`-th derivative in `ρ`.
    pub fn derivative(&self, j: usize) -> Self {
        let mut terms = self.terms.clone();
        for _ in 0..j {
            terms = terms
                .into_iter()
                .filter_map(|(c, p)| {
                    if same_exponent(p, 0.0) {
                        None
                    } else {
                        Some((c * p, p - 1.0))
                    }
                })
                .collect();
        }
        Self::new(self.d, terms)
    }

    /// Euclidean Laplacian: `c ρ^p ↦ c p(p+d−2) ρ^{p−2}`.
    pub fn laplacian(&self) -> Self {
        let shift = 2.0 - self.d as f64;
        Self::new(
            self.d,
            self.terms.iter().filter_map(|&(c, p)| {
                if same_exponent(p, 0.0) || same_exponent(p, shift) {
                    None
                } else {
                    Some((c * p * (p - shift), p - 2.0))
                }
            }),
        )
    }

    /// `Δ^m`.
    pub fn power_lm(&self, m: usize) -> Self {
        (0..m).fold(self.clone(), |e, _| e.laplacian())
    }

    /// `∏_k (Δ + γ_k)`.
    pub fn script_l(&self, gammas: &[f64]) -> Self {
        gammas.iter().fold(self.clone(), |e, &g| e.laplacian().add(&e.scaled(g)))
    }
}

/// Exact Euclidean Laplacian of a radial expansion.
pub fn apply_laplacian_radial(e: &RadialExpansion) -> RadialExpansion {
    e.laplacian()
}

/// `Δ^m` of a radial expansion.
pub fn apply_power_lm(e: &RadialExpansion, m: usize) -> RadialExpansion {
    e.power_lm(m)
}

/// `∏_k (Δ + γ_k)` of a radial expansion.
pub fn apply_script_l(e: &RadialExpansion, gammas: &[f64]) -> RadialExpansion {
    e.script_l(gammas)
}

/// The operator `∏_k (Δ + γ_k)` written as `Σ_j A_j(ρ) ∂_ρ^j` on radial
/// functions, with each `A_j` a radial expansion.
///
/// Used to apply the operator to products `ψ·f` by the Leibniz rule without
/// expanding `ψ` in powers of `ρ`.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialOperator {
    d: usize,
    coefficients: Vec<RadialExpansion>,
}

impl RadialOperator {
    pub fn identity(d: usize) -> Self {
        Self { d, coefficients: vec![RadialExpansion::monomial(d, 1.0, 0.0)] }
    }

    /// `(Δ + γ) ∘ self`, using `Δ(A ∂^j) = A'' ∂^j + 2A' ∂^{j+1} + A ∂^{j+2}
    /// + (d−1)ρ^{-1}(A' ∂^j + A ∂^{j+1})`.
    pub fn then_shifted_laplacian(&self, gamma: f64) -> Self {
        let d = self.d;
        let inv = RadialExpansion::monomial(d, (d as f64) - 1.0, -1.0);
        let mut out = vec![RadialExpansion::zero(d); self.coefficients.len() + 2];
        for (j, a) in self.coefficients.iter().enumerate() {
            let a1 = a.derivative(1);
            let a2 = a.derivative(2);
            out[j] = out[j].add(&a2).add(&inv.mul(&a1)).add(&a.scaled(gamma));
            out[j + 1] = out[j + 1].add(&a1.scaled(2.0)).add(&inv.mul(a));
            out[j + 2] = out[j + 2].add(a);
        }
        Self { d, coefficients: out }
    }

    /// `∏_k (Δ + γ_k)`.
    pub fn script_l(d: usize, gammas: &[f64]) -> Self {
        gammas.iter().fold(Self::identity(d), |op, &g| op.then_shifted_laplacian(g))
    }

    pub fn order(&self) -> usize {
        self.coefficients.len() - 1
    }

    pub fn coefficients(&self) -> &[RadialExpansion] {
        &self.coefficients
    }

    /// Applies the operator at `rho` given the radial derivatives
    /// `f, f', …, f^{(order)}` there.
    pub fn apply(&self, rho: f64, derivs: &[f64]) -> f64 {
        self.coefficients.iter().zip(derivs).map(|(a, f)| a.at(rho) * f).sum()
    }

    /// Applies the operator to `ψ·f` at `rho` by the Leibniz rule.
    pub fn apply_product(&self, rho: f64, psi: &[f64], f: &[f64]) -> f64 {
        let n = self.order();
        let mut derivs = vec![0.0; n + 1];
        let mut binom = vec![1.0; n + 1];
        for (j, out) in derivs.iter_mut().enumerate() {
            if j > 0 {
                for i in (1..j).rev() {
                    binom[i] += binom[i - 1];
                }
            }
            *out = (0..=j).map(|i| binom[i] * psi[i] * f[j - i]).sum();
        }
        self.apply(rho, &derivs)
    }
}
