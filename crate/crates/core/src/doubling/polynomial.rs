//! Real polynomials in `d` variables with exact constant-coefficient
//! differential operators.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

/// Multi-index of exponents.
pub type MultiIndex = Vec<u32>;

/// `Σ c_μ x^μ` in `d` variables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Polynomial {
    d: usize,
    terms: BTreeMap<MultiIndex, f64>,
}

impl Polynomial {
    pub fn zero(d: usize) -> Self {
        Self { d, terms: BTreeMap::new() }
    }

    pub fn constant(d: usize, c: f64) -> Self {
        Self::monomial(c, vec![0; d])
    }

    pub fn monomial(c: f64, exponents: MultiIndex) -> Self {
        let mut p = Self::zero(exponents.len());
        p.add_term(exponents, c);
        p
    }

    /// `x_i`.
    pub fn coordinate(d: usize, i: usize) -> Self {
        let mut e = vec![0; d];
        e[i] = 1;
        Self::monomial(1.0, e)
    }

    /// `|x|² = Σ x_i²`.
    pub fn radius_squared(d: usize) -> Self {
        (0..d).fold(Self::zero(d), |acc, i| {
            let mut e = vec![0; d];
            e[i] = 2;
            acc.add(&Self::monomial(1.0, e))
        })
    }

    /// `x₁²`.
    pub fn coordinate_square(d: usize) -> Self {
        let mut e = vec![0; d];
        e[0] = 2;
        Self::monomial(1.0, e)
    }

    /// `|x|^{2k}`.
    pub fn radial_power(d: usize, k: u32) -> Self {
        let r2 = Self::radius_squared(d);
        (0..k).fold(Self::constant(d, 1.0), |acc, _| acc.mul(&r2))
    }

    fn add_term(&mut self, e: MultiIndex, c: f64) {
        if c == 0.0 {
            return;
        }
        let slot = self.terms.entry(e).or_insert(0.0);
        *slot += c;
        if *slot == 0.0 {
            self.terms.retain(|_, v| *v != 0.0);
        }
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, f64)> {
        self.terms.iter().map(|(e, &c)| (e, c))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().map(|e| e.iter().sum()).max().unwrap_or(0)
    }

    pub fn max_abs_coefficient(&self) -> f64 {
        self.terms.values().fold(0.0, |a, c| a.max(c.abs()))
    }

    /// Constant value if the polynomial has no non-constant terms.
    pub fn as_constant(&self) -> Option<f64> {
        match self.terms.len() {
            0 => Some(0.0),
            1 => self.terms.get(&vec![0; self.d]).copied(),
            _ => None,
        }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(e, c)| c * e.iter().zip(x).map(|(&k, &xi)| xi.powi(k as i32)).product::<f64>())
            .sum()
    }

    /// `Σ |c_μ x^μ|`, the roundoff scale of [`Self::eval`].
    pub fn abs_eval(&self, x: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(e, c)| (c * e.iter().zip(x).map(|(&k, &xi)| xi.powi(k as i32)).product::<f64>()).abs())
            .sum()
    }

    pub fn scaled(&self, s: f64) -> Self {
        let mut out = Self::zero(self.d);
        for (e, c) in &self.terms {
            out.add_term(e.clone(), s * c);
        }
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), *c);
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero(self.d);
        for (a, ca) in &self.terms {
            for (b, cb) in &other.terms {
                let e = a.iter().zip(b).map(|(x, y)| x + y).collect();
                out.add_term(e, ca * cb);
            }
        }
        out
    }

    /// `∂^μ`.
    pub fn derivative(&self, mu: &[u32]) -> Self {
        let mut out = Self::zero(self.d);
        'terms: for (e, c) in &self.terms {
            let mut coef = *c;
            let mut ne = e.clone();
            for (k, &m) in mu.iter().enumerate() {
                if ne[k] < m {
                    continue 'terms;
                }
                for j in 0..m {
                    coef *= (ne[k] - j) as f64;
                }
                ne[k] -= m;
            }
            out.add_term(ne, coef);
        }
        out
    }

    pub fn laplacian(&self) -> Self {
        (0..self.d).fold(Self::zero(self.d), |acc, i| {
            let mut mu = vec![0; self.d];
            mu[i] = 2;
            acc.add(&self.derivative(&mu))
        })
    }

    /// `∏_k (Δ + γ_k)`.
    pub fn script_l(&self, gammas: &[f64]) -> Self {
        gammas.iter().fold(self.clone(), |p, &g| p.laplacian().add(&p.scaled(g)))
    }

    /// `Σ_μ a_μ ∂^μ`.
    pub fn apply(&self, coefficients: &[(MultiIndex, f64)]) -> Self {
        coefficients.iter().fold(Self::zero(self.d), |acc, (mu, a)| acc.add(&self.derivative(mu).scaled(*a)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn laplacians() {
        assert_eq!(Polynomial::coordinate_square(2).laplacian(), Polynomial::constant(2, 2.0));
        assert_eq!(Polynomial::radius_squared(3).laplacian(), Polynomial::constant(3, 6.0));
        assert!(Polynomial::coordinate_square(2).laplacian().laplacian().is_zero());
        // Δ|x|^{2k} = 2k(2k+d−2)|x|^{2k−2}
        let p = Polynomial::radial_power(3, 3);
        let want = Polynomial::radial_power(3, 2).scaled(6.0 * 7.0);
        assert_eq!(p.laplacian(), want);
    }

    #[test]
    fn script_l_with_shift() {
        let p = Polynomial::coordinate_square(2);
        let l = p.script_l(&[0.0, 1.0]);
        assert_eq!(l.as_constant(), Some(2.0));
    }

    #[test]
    fn derivative_and_eval() {
        let p = Polynomial::monomial(3.0, vec![2, 1]);
        assert_eq!(p.derivative(&[1, 1]), Polynomial::monomial(6.0, vec![1, 0]));
        assert!(p.derivative(&[0, 2]).is_zero());
        assert_eq!(p.eval(&[2.0, -1.0]), -12.0);
        assert_eq!(p.degree(), 3);
    }

    #[test]
    fn cancellation_removes_terms() {
        let p = Polynomial::radius_squared(2);
        assert!(p.add(&p.scaled(-1.0)).is_zero());
    }
}
