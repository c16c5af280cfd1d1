//! Sampled eigenfunction sums, their zero sets, distance-to-zero fields,
//! density radii and nodal-domain inner radii.
//!
//! Torus fields live on the uniform grid `{i/N}^d`. Sphere fields live on a
//! latitude-longitude grid of `N` colatitudes `θ_i = iπ/(N−1)` (both poles
//! included) and `2N` longitudes `φ_j = jπ/N`. Distances are measured in the
//! manifold metric: minimum-image Euclidean on the torus, great-circle on S².

mod distance;
mod zeros;

use std::f64::consts::PI;

use serde::Serialize;

use crate::par;
use crate::spectral::{sphere, EigenSum, Manifold};
use crate::{Error, Result};

pub use distance::{DensityRadius, DistanceField};
pub use zeros::ZeroSet;

/// Smallest accepted resolution per axis.
pub const MIN_RESOLUTION: usize = 16;

/// Samples required per shortest oscillation `2π/√λ_m`.
pub const SAMPLES_PER_OSCILLATION: f64 = 8.0;

/// Exact values of an [`EigenSum`] on a grid.
#[derive(Debug, Clone)]
pub struct ScalarGridField {
    sum: EigenSum,
    n: usize,
    values: Vec<f64>,
    workers: usize,
}

/// Smallest resolution accepted for `sum`.
pub fn minimum_resolution(sum: &EigenSum) -> usize {
    let key = sum.max_eigen_key() as u128;
    // torus: spacing 1/N < 2π/(8·2π|ν|), i.e. N² > 64|ν|²
    // sphere: spacing π/(N−1) < 2π/(8√(k(k+1))), i.e. (N−1)² > 16k(k+1)
    let (bound, offset) = match sum.manifold() {
        Manifold::Torus { .. } => (64 * key, 0),
        Manifold::Sphere => (16 * key * (key + 1), 1),
    };
    let mut n = (bound as f64).sqrt() as u128;
    while n * n <= bound {
        n += 1;
    }
    ((n + offset) as usize).max(MIN_RESOLUTION)
}

/// Samples `sum` at resolution `n` on one thread.
pub fn sample(sum: &EigenSum, n: usize) -> Result<ScalarGridField> {
    sample_with_workers(sum, n, 1)
}

/// Samples `sum` at resolution `n`; `workers` threads are used here and in
/// the distance transforms derived from the field. Output does not depend on
/// `workers`.
pub fn sample_with_workers(sum: &EigenSum, n: usize, workers: usize) -> Result<ScalarGridField> {
    let minimum = minimum_resolution(sum);
    if n < minimum {
        return Err(Error::ResolutionRefused { given: n, minimum });
    }
    let manifold = sum.manifold();
    let count = match manifold {
        Manifold::Torus { dim } => n
            .checked_pow(dim as u32)
            .filter(|&c| c <= 1 << 26)
            .ok_or_else(|| Error::InvalidParameter(format!("{n}^{dim} grid nodes is too many")))?,
        Manifold::Sphere => 2 * n * n,
    };
    let grid = Grid::new(manifold, n);
    let values = par::map_indexed(count, workers, |idx| {
        sum.eval(&grid.point(idx)).expect("grid nodes lie on the manifold")
    });
    Ok(ScalarGridField { sum: sum.clone(), n, values, workers })
}

impl ScalarGridField {
    pub fn sum(&self) -> &EigenSum {
        &self.sum
    }

    pub fn manifold(&self) -> Manifold {
        self.sum.manifold()
    }

    /// Resolution per axis (colatitude count on the sphere).
    pub fn resolution(&self) -> usize {
        self.n
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn workers(&self) -> usize {
        self.workers
    }

    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = workers;
        self
    }

    /// Node coordinates: torus point in `[0,1)^d` or unit 3-vector.
    pub fn node(&self, idx: usize) -> Vec<f64> {
        self.grid().point(idx)
    }

    /// Grid shape: `[N; d]` on the torus, `[N, 2N]` on the sphere.
    pub fn shape(&self) -> Vec<usize> {
        match self.manifold() {
            Manifold::Torus { dim } => vec![self.n; dim],
            Manifold::Sphere => vec![self.n, 2 * self.n],
        }
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |a, v| a.max(v.abs()))
    }

    /// Half the largest cell diagonal, in the manifold metric.
    pub fn grid_error(&self) -> f64 {
        let n = self.n as f64;
        match self.manifold() {
            Manifold::Torus { dim } => (dim as f64).sqrt() / (2.0 * n),
            Manifold::Sphere => (PI / (n - 1.0)).hypot(PI / n) / 2.0,
        }
    }

    /// Largest possible distance between two points of the manifold.
    pub fn manifold_diameter(&self) -> f64 {
        match self.manifold() {
            Manifold::Torus { dim } => (dim as f64).sqrt() / 2.0,
            Manifold::Sphere => PI,
        }
    }

    pub(crate) fn grid(&self) -> Grid {
        Grid::new(self.manifold(), self.n)
    }

    /// Sign class of a node: exact zeros count as positive.
    pub(crate) fn negative(&self, idx: usize) -> bool {
        self.values[idx] < 0.0
    }

    /// Connected components of sign-constant nodes.
    ///
    /// Nodes are joined to their axis neighbours (with periodic wrap on the
    /// torus and in longitude); on the sphere each pole row is one point.
    /// Returns a component id per node, ids numbered by first node index.
    pub fn components(&self) -> Vec<usize> {
        let g = self.grid();
        let mut id = vec![usize::MAX; self.values.len()];
        let mut next = 0;
        let mut stack = Vec::new();
        for start in 0..self.values.len() {
            if id[start] != usize::MAX {
                continue;
            }
            let sign = self.negative(start);
            id[start] = next;
            stack.push(start);
            while let Some(v) = stack.pop() {
                for w in g.neighbours(v) {
                    if id[w] == usize::MAX && self.negative(w) == sign {
                        id[w] = next;
                        stack.push(w);
                    }
                }
            }
            next += 1;
        }
        id
    }
}

/// Index arithmetic for the two grid layouts.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Grid {
    pub manifold: Manifold,
    pub n: usize,
}

impl Grid {
    pub fn new(manifold: Manifold, n: usize) -> Self {
        Self { manifold, n }
    }

    pub fn cols(&self) -> usize {
        match self.manifold {
            Manifold::Torus { .. } => self.n,
            Manifold::Sphere => 2 * self.n,
        }
    }

    pub fn dtheta(&self) -> f64 {
        PI / (self.n as f64 - 1.0)
    }

    pub fn dphi(&self) -> f64 {
        PI / self.n as f64
    }

    /// Parameter coordinates of node `(i, j)` of a 2-d layout.
    pub fn param(&self, i: usize, j: usize) -> [f64; 2] {
        match self.manifold {
            Manifold::Torus { .. } => [i as f64 / self.n as f64, j as f64 / self.n as f64],
            Manifold::Sphere => [i as f64 * self.dtheta(), j as f64 * self.dphi()],
        }
    }

    /// Manifold point for parameter coordinates.
    pub fn embed(&self, p: [f64; 2]) -> Vec<f64> {
        match self.manifold {
            Manifold::Torus { .. } => p.to_vec(),
            Manifold::Sphere => sphere::from_angles(p[0], p[1]).to_vec(),
        }
    }

    pub fn point(&self, idx: usize) -> Vec<f64> {
        match self.manifold {
            Manifold::Torus { dim } => {
                let mut rest = idx;
                let mut out = vec![0.0; dim];
                for c in out.iter_mut().rev() {
                    *c = (rest % self.n) as f64 / self.n as f64;
                    rest /= self.n;
                }
                out
            }
            Manifold::Sphere => {
                let cols = self.cols();
                if idx / cols == 0 {
                    return vec![0.0, 0.0, 1.0];
                }
                if idx / cols == self.n - 1 {
                    return vec![0.0, 0.0, -1.0];
                }
                self.embed(self.param(idx / cols, idx % cols))
            }
        }
    }

    pub fn neighbours(&self, idx: usize) -> Vec<usize> {
        match self.manifold {
            Manifold::Torus { dim } => {
                let n = self.n;
                let mut out = Vec::with_capacity(2 * dim);
                let mut stride = 1;
                for _ in 0..dim {
                    let c = (idx / stride) % n;
                    out.push(idx - c * stride + ((c + 1) % n) * stride);
                    out.push(idx - c * stride + ((c + n - 1) % n) * stride);
                    stride *= n;
                }
                out
            }
            Manifold::Sphere => {
                let cols = self.cols();
                let (i, j) = (idx / cols, idx % cols);
                let mut out = vec![i * cols + (j + 1) % cols, i * cols + (j + cols - 1) % cols];
                if i > 0 {
                    out.push((i - 1) * cols + j);
                }
                if i + 1 < self.n {
                    out.push((i + 1) * cols + j);
                }
                if i == 0 || i + 1 == self.n {
                    // every node of a pole row is the pole itself
                    out.push(i * cols);
                }
                out
            }
        }
    }
}

/// Zero set of a sampled field.
pub fn extract_zero_set(field: &ScalarGridField) -> Result<ZeroSet> {
    zeros::extract(field)
}

/// Per-node distance to the zero set.
pub fn distance_field(field: &ScalarGridField, zs: &ZeroSet) -> Result<DistanceField> {
    distance::compute(field, zs)
}

/// `sup_y dist(y, Z_f)` over grid nodes, with the grid-error bound attached.
pub fn density_radius(df: &DistanceField) -> DensityRadius {
    df.density_radius()
}

/// Samples, extracts and measures in one step.
pub fn measure_density_radius(sum: &EigenSum, n: usize, workers: usize) -> Result<DensityRadius> {
    let field = sample_with_workers(sum, n, workers)?;
    let zs = extract_zero_set(&field)?;
    Ok(distance_field(&field, &zs)?.density_radius())
}

/// Inner radius of one nodal domain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InnerRadius {
    pub component: usize,
    pub negative: bool,
    pub nodes: usize,
    pub radius: f64,
}

/// Inner radius of every sign-constant component: the largest distance to
/// the zero set over its nodes. Without zeros there is one component whose
/// inner radius is the diameter of the manifold.
pub fn inner_radii(field: &ScalarGridField) -> Result<Vec<InnerRadius>> {
    let ids = field.components();
    let count = ids.iter().copied().max().map_or(0, |m| m + 1);
    let zs = extract_zero_set(field)?;
    let dist = if zs.is_empty() { None } else { Some(distance_field(field, &zs)?) };
    let mut out: Vec<InnerRadius> = (0..count)
        .map(|c| InnerRadius { component: c, negative: false, nodes: 0, radius: 0.0 })
        .collect();
    for (idx, &c) in ids.iter().enumerate() {
        let r = &mut out[c];
        r.nodes += 1;
        r.negative = field.negative(idx);
        r.radius = match &dist {
            Some(d) => r.radius.max(d.values()[idx]),
            None => field.manifold_diameter(),
        };
    }
    Ok(out)
}

/// One row of a scaling table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScalingRow {
    pub lambda1: f64,
    pub m: usize,
    #[serde(rename = "N")]
    pub n: usize,
    pub density_radius: f64,
    pub grid_error: f64,
    pub product_radius_sqrtlambda: f64,
}

impl ScalingRow {
    /// `grid_error · √λ₁`, the uncertainty of the product.
    pub fn product_error(&self) -> f64 {
        self.grid_error * self.lambda1.sqrt()
    }
}

/// Measures `density_radius · √λ₁` along a family of sums.
///
/// Each sum is sampled with `samples_per_period` nodes per period of its
/// highest lattice frequency (torus) or per `π/degree` (sphere), never below
/// the resolution floor.
pub fn scaling_experiment<F>(
    family: F,
    params: &[u64],
    samples_per_period: usize,
    workers: usize,
) -> Result<Vec<ScalingRow>>
where
    F: Fn(u64) -> Result<EigenSum>,
{
    let mut rows = Vec::with_capacity(params.len());
    for &p in params {
        let sum = family(p)?;
        let lambda1 = sum.lambda1();
        if lambda1 <= 0.0 {
            return Err(Error::NonPositiveEigenvalue(lambda1));
        }
        let mut n = samples_per_period * sum.max_frequency().max(1) as usize;
        if sum.manifold() == Manifold::Sphere {
            n += 1;
        }
        let n = n.max(minimum_resolution(&sum));
        let dr = measure_density_radius(&sum, n, workers)?;
        rows.push(ScalingRow {
            lambda1,
            m: sum.m(),
            n,
            density_radius: dr.radius,
            grid_error: dr.grid_error,
            product_radius_sqrtlambda: dr.radius * lambda1.sqrt(),
        });
    }
    Ok(rows)
}
