//! Radial cutoff `ψ_r`: 0 on `[0, r/2]`, 1 on `[r, ∞)`, built as the
//! distribution function of a `K`-fold convolution of normalized boxes.
//!
//! Box lengths follow `ℓ_i ∝ 1/(i·ln²(i+1))`, scaled to sum to `r/2`. Since
//! each convolution gains one derivative, `ψ ∈ C^{K−1}` with a bounded,
//! piecewise-continuous `K`-th derivative, and `|ψ^{(j)}| ≤ 2^j/(ℓ_1⋯ℓ_j)`,
//! which for this length sequence grows like `(C j ln² j)^j r^{-j}`.

use serde::Serialize;

use crate::{Error, Result};

/// Knots closer than this fraction of the support are merged.
const KNOT_MERGE: f64 = 1e-13;

/// Piecewise polynomial on `[knots[0], knots[last]]`, constant outside.
/// Piece `i` is stored in powers of `x − knots[i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewisePoly {
    knots: Vec<f64>,
    pieces: Vec<Vec<f64>>,
    left: f64,
    right: f64,
}

fn poly_eval(c: &[f64], t: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &a| acc * t + a)
}

fn poly_derivative(c: &[f64]) -> Vec<f64> {
    c.iter().enumerate().skip(1).map(|(k, &a)| k as f64 * a).collect()
}

/// Coefficients of `p(t + s)` in powers of `t`.
fn poly_shift(c: &[f64], s: f64) -> Vec<f64> {
    let mut out = c.to_vec();
    let n = out.len();
    for i in 0..n {
        for k in (i..n - 1).rev() {
            out[k] += s * out[k + 1];
        }
    }
    out
}

impl PiecewisePoly {
    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn pieces(&self) -> &[Vec<f64>] {
        &self.pieces
    }

    fn piece_index(&self, x: f64) -> Option<usize> {
        let n = self.pieces.len();
        if x < self.knots[0] || x >= self.knots[n] {
            return None;
        }
        Some((self.knots.partition_point(|&k| k <= x) - 1).min(n - 1))
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.derivative_at(x, 0)
    }

    /// `j`-th derivative at `x`, taken from the piece to the right of `x`.
    pub fn derivative_at(&self, x: f64, j: usize) -> f64 {
        match self.piece_index(x) {
            Some(i) => {
                let mut c = self.pieces[i].clone();
                for _ in 0..j {
                    c = poly_derivative(&c);
                }
                poly_eval(&c, x - self.knots[i])
            }
            None if j > 0 => 0.0,
            None if x < self.knots[0] => self.left,
            None => self.right,
        }
    }

    /// Derivatives `0..=order` at `x`, from the piece to the right of `x`.
    pub fn derivatives(&self, x: f64, order: usize) -> Vec<f64> {
        match self.piece_index(x) {
            Some(i) => self.piece_derivatives(i, x, order),
            None => {
                let mut out = vec![0.0; order + 1];
                out[0] = if x < self.knots[0] { self.left } else { self.right };
                out
            }
        }
    }

    /// Derivatives `0..=order` at `x` from piece `i` (one-sided at its ends).
    pub fn piece_derivatives(&self, i: usize, x: f64, order: usize) -> Vec<f64> {
        let mut c = self.pieces[i].clone();
        let t = x - self.knots[i];
        let mut out = Vec::with_capacity(order + 1);
        for _ in 0..=order {
            out.push(poly_eval(&c, t));
            c = poly_derivative(&c);
        }
        out
    }

    /// Antiderivative vanishing at the left end.
    fn integral(&self) -> Self {
        let mut acc = self.left * 0.0;
        let mut pieces = Vec::with_capacity(self.pieces.len());
        for (i, c) in self.pieces.iter().enumerate() {
            let mut p = vec![acc];
            p.extend(c.iter().enumerate().map(|(k, &a)| a / (k + 1) as f64));
            acc = poly_eval(&p, self.knots[i + 1] - self.knots[i]);
            pieces.push(p);
        }
        Self { knots: self.knots.clone(), pieces, left: 0.0, right: acc }
    }

    /// Coefficients of the piece containing `probe`, re-expanded about `x`.
    /// The probe is an interior point, so roundoff in `x` cannot select a
    /// neighbouring piece.
    fn local_at(&self, x: f64, probe: f64) -> Vec<f64> {
        match self.piece_index(probe) {
            Some(i) => poly_shift(&self.pieces[i], x - self.knots[i]),
            None if probe < self.knots[0] => vec![self.left],
            None => vec![self.right],
        }
    }

    /// Convolution of a density with the normalized box `χ_[0,ℓ]/ℓ`:
    /// `(G(x) − G(x−ℓ))/ℓ` with `G` the antiderivative.
    fn convolve_box(&self, len: f64) -> Self {
        let g = self.integral();
        let span = self.knots[self.knots.len() - 1] + len - self.knots[0];
        let mut knots: Vec<f64> = self.knots.iter().flat_map(|&k| [k, k + len]).collect();
        knots.sort_by(f64::total_cmp);
        knots.dedup_by(|a, b| (*a - *b).abs() <= KNOT_MERGE * span);
        let mut pieces = Vec::with_capacity(knots.len() - 1);
        for w in knots.windows(2) {
            let s = w[0];
            let mid = 0.5 * (w[0] + w[1]);
            let a = g.local_at(s, mid);
            let b = g.local_at(s - len, mid - len);
            let n = a.len().max(b.len());
            let c: Vec<f64> = (0..n)
                .map(|k| (a.get(k).copied().unwrap_or(0.0) - b.get(k).copied().unwrap_or(0.0)) / len)
                .collect();
            pieces.push(c);
        }
        Self { knots, pieces, left: 0.0, right: 0.0 }
    }
}

/// Box lengths `ℓ_1 ≥ … ≥ ℓ_K`, proportional to `1/(i ln²(i+1))` and
/// summing to `total`.
pub fn box_lengths(k: usize, total: f64) -> Vec<f64> {
    let raw: Vec<f64> = (1..=k)
        .map(|i| {
            let l = ((i + 1) as f64).ln();
            1.0 / (i as f64 * l * l)
        })
        .collect();
    let s: f64 = raw.iter().sum();
    raw.iter().map(|x| x * total / s).collect()
}

/// Cutoff `ψ_r` with its measured derivative maxima.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CutoffFunction {
    pub r: f64,
    pub k: usize,
    pub lengths: Vec<f64>,
    /// `max |ψ^{(j)}|` for `j = 0..=K`.
    pub derivative_max: Vec<f64>,
    /// Smallest `C` with `max|ψ^{(j)}| ≤ (C j ln²(j+1))^j r^{-j}` for `1 ≤ j ≤ K`.
    pub bound_constant: f64,
    #[serde(skip)]
    psi: PiecewisePoly,
}

impl CutoffFunction {
    pub fn eval(&self, rho: f64) -> f64 {
        self.psi.eval(rho)
    }

    pub fn derivative_at(&self, rho: f64, j: usize) -> f64 {
        self.psi.derivative_at(rho, j)
    }

    pub fn derivatives(&self, rho: f64, order: usize) -> Vec<f64> {
        self.psi.derivatives(rho, order)
    }

    pub fn pieces(&self) -> &PiecewisePoly {
        &self.psi
    }

    /// `(C j ln²(j+1))^j r^{-j}` with the recorded `C`.
    pub fn derivative_bound(&self, j: usize) -> f64 {
        let l = ((j + 1) as f64).ln();
        (self.bound_constant * j as f64 * l * l / self.r).powi(j as i32)
    }
}

/// Builds `ψ_r` from `K` box convolutions.
pub fn build_cutoff(r: f64, k: usize) -> Result<CutoffFunction> {
    if k == 0 {
        return Err(Error::InvalidParameter("cutoff smoothness K must be >= 1".into()));
    }
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::InvalidParameter(format!("cutoff radius {r} must be positive")));
    }
    let lengths = box_lengths(k, r / 2.0);
    let mut density = PiecewisePoly {
        knots: vec![r / 2.0, r / 2.0 + lengths[0]],
        pieces: vec![vec![1.0 / lengths[0]]],
        left: 0.0,
        right: 0.0,
    };
    for &len in &lengths[1..] {
        density = density.convolve_box(len);
    }
    let mut psi = density.integral();
    // the support ends at r up to roundoff in the summed lengths
    let last = psi.knots.len() - 1;
    psi.knots[last] = r;
    psi.right = 1.0;

    let mut derivative_max = vec![0.0f64; k + 1];
    for i in 0..psi.pieces.len() {
        let (a, b) = (psi.knots[i], psi.knots[i + 1]);
        for s in 0..=8 {
            let x = a + (b - a) * s as f64 / 8.0;
            for (j, v) in psi.piece_derivatives(i, x, k).into_iter().enumerate() {
                derivative_max[j] = derivative_max[j].max(v.abs());
            }
        }
    }
    let bound_constant = (1..=k)
        .map(|j| {
            let l = ((j + 1) as f64).ln();
            (derivative_max[j] * r.powi(j as i32)).powf(1.0 / j as f64) / (j as f64 * l * l)
        })
        .fold(0.0, f64::max);
    Ok(CutoffFunction { r, k, lengths, derivative_max, bound_constant, psi })
}
