//! Finite-difference oracle for the cylinder operator `Δ ∏_{k≥2}(Δ + λ_k − λ₁)`.
//!
//! The operator is a polynomial `P(Δ)` of degree `m`. Each power of `Δ` is
//! applied as the standard 3-point second difference summed over the `d + 1`
//! coordinates of `T^d × ℝ`, on a local cube of `(2m+1)^{d+1}` samples.

use crate::spectral::{ExtendedFunction, Manifold};
use crate::{Error, Result};

/// Largest number of distinct eigenvalues the oracle accepts.
pub const FD_MAX_ORDER: usize = 4;
/// Smallest accepted step; below it roundoff dominates the stencil.
pub const FD_MIN_STEP: f64 = 1e-4;

/// Coefficients of `z ∏ (z + c_k)` in ascending powers of `z`.
pub(crate) fn operator_polynomial(shifts: &[f64]) -> Vec<f64> {
    let mut p = vec![0.0, 1.0];
    for &c in shifts {
        let mut next = vec![0.0; p.len() + 1];
        for (j, &pj) in p.iter().enumerate() {
            next[j] += c * pj;
            next[j + 1] += pj;
        }
        p = next;
    }
    p
}

pub(crate) fn product_residual(h: &ExtendedFunction, x: &[f64], t: f64, step: f64) -> Result<f64> {
    let dim = match h.base().manifold() {
        Manifold::Torus { dim } => dim,
        Manifold::Sphere => {
            return Err(Error::Precondition(
                "finite-difference oracle is implemented on the torus only".into(),
            ))
        }
    };
    if !(step > 0.0) {
        return Err(Error::InvalidParameter(format!("step must be positive, got {step}")));
    }
    if step < FD_MIN_STEP {
        return Err(Error::InvalidParameter(format!(
            "step {step} below {FD_MIN_STEP}; use the exact residual"
        )));
    }
    let m = h.base().m();
    if m > FD_MAX_ORDER {
        return Err(Error::InvalidParameter(format!(
            "m = {m} exceeds {FD_MAX_ORDER}; use the exact residual"
        )));
    }
    if x.len() != dim {
        return Err(Error::OffManifold(format!("torus point {x:?} for dimension {dim}")));
    }

    let poly = operator_polynomial(&h.operator_shifts());
    let radius = m;
    let side = 2 * radius + 1;
    let axes = dim + 1;
    let total = side.pow(axes as u32);
    let strides: Vec<usize> = (0..axes).map(|a| side.pow(a as u32)).collect();

    let mut u = vec![0.0; total];
    let mut point = vec![0.0; dim];
    for (idx, slot) in u.iter_mut().enumerate() {
        let mut tt = t;
        for a in 0..axes {
            let off = ((idx / strides[a]) % side) as f64 - radius as f64;
            if a < dim {
                point[a] = x[a] + off * step;
            } else {
                tt = t + off * step;
            }
        }
        *slot = h.eval(&point, tt)?;
    }

    let center: usize = strides.iter().map(|s| s * radius).sum();
    let inv_h2 = 1.0 / (step * step);
    let mut acc = poly[0] * u[center];
    let mut next = vec![0.0; total];
    for (j, &pj) in poly.iter().enumerate().skip(1) {
        for idx in 0..total {
            let inside = strides
                .iter()
                .all(|&s| (j..side - j).contains(&((idx / s) % side)));
            if !inside {
                continue;
            }
            let mut lap = 0.0;
            for &s in &strides {
                lap += u[idx + s] - 2.0 * u[idx] + u[idx - s];
            }
            next[idx] = lap * inv_h2;
        }
        std::mem::swap(&mut u, &mut next);
        acc += pj * u[center];
    }
    Ok(acc)
}
