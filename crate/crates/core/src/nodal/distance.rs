//! Distance from grid nodes to a zero set.
//!
//! Zeros are binned by the grid row that produced them (first-axis column on
//! the torus, colatitude band on the sphere). A query scans rows outward from
//! its own and stops once the row gap alone exceeds the best distance found.

use serde::Serialize;

use crate::nodal::{zeros::ZeroSet, Grid, ScalarGridField};
use crate::par;
use crate::spectral::{sphere, Manifold};
use crate::{Error, Result};

/// Distance from every node of a field to its zero set.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceField {
    manifold: Manifold,
    shape: Vec<usize>,
    values: Vec<f64>,
    grid_error: f64,
}

/// `sup_y dist(y, Z_f)` over grid nodes with its discretization bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DensityRadius {
    pub radius: f64,
    pub grid_error: f64,
    /// Index of the node attaining the maximum (first in index order).
    pub argmax: usize,
}

impl DistanceField {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn manifold(&self) -> Manifold {
        self.manifold
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn grid_error(&self) -> f64 {
        self.grid_error
    }

    pub fn density_radius(&self) -> DensityRadius {
        let mut best = (0.0, 0);
        for (k, &d) in self.values.iter().enumerate() {
            if d > best.0 {
                best = (d, k);
            }
        }
        DensityRadius { radius: best.0, grid_error: self.grid_error, argmax: best.1 }
    }
}

/// Minimum-image Euclidean distance from `y` to the segment `ab` on the torus.
pub(crate) fn torus_segment_distance(y: &[f64], a: &[f64], b: &[f64]) -> f64 {
    let shifted: Vec<f64> = y.iter().zip(a).map(|(yi, ai)| yi + (ai - yi).round()).collect();
    let ab: Vec<f64> = a.iter().zip(b).map(|(ai, bi)| bi - ai).collect();
    let ay: Vec<f64> = a.iter().zip(&shifted).map(|(ai, yi)| yi - ai).collect();
    let len2: f64 = ab.iter().map(|c| c * c).sum();
    let t = if len2 > 0.0 {
        (ay.iter().zip(&ab).map(|(p, q)| p * q).sum::<f64>() / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    ay.iter().zip(&ab).map(|(p, q)| (p - t * q).powi(2)).sum::<f64>().sqrt()
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn as3(p: &[f64]) -> [f64; 3] {
    [p[0], p[1], p[2]]
}

/// Great-circle distance from `p` to the shorter arc from `a` to `b`.
pub(crate) fn sphere_arc_distance(p: [f64; 3], a: [f64; 3], b: [f64; 3]) -> f64 {
    let n = cross(a, b);
    let nn = dot(n, n).sqrt();
    let ends = sphere::great_circle(p, a).min(sphere::great_circle(p, b));
    if nn < 1e-15 {
        return ends;
    }
    let n = [n[0] / nn, n[1] / nn, n[2] / nn];
    let h = dot(p, n);
    let q = [p[0] - h * n[0], p[1] - h * n[1], p[2] - h * n[2]];
    let qn = dot(q, q).sqrt();
    if qn == 0.0 {
        return ends;
    }
    if dot(cross(a, q), n) >= 0.0 && dot(cross(q, b), n) >= 0.0 {
        h.abs().atan2(qn)
    } else {
        ends
    }
}

pub(crate) fn compute(field: &ScalarGridField, zs: &ZeroSet) -> Result<DistanceField> {
    if zs.is_empty() {
        return Err(Error::NoZeros);
    }
    let g = field.grid();
    let count = field.values().len();
    let values = match g.manifold {
        Manifold::Torus { dim: 1 } => {
            let mut zeros: Vec<f64> = zs.points.iter().map(|p| p[0]).collect();
            zeros.sort_by(f64::total_cmp);
            par::map_indexed(count, field.workers(), |k| circle_distance(&zeros, g.point(k)[0]))
        }
        _ => {
            let bins = Bins::new(g, zs);
            par::map_indexed(count, field.workers(), |k| bins.nearest(k))
        }
    };
    Ok(DistanceField {
        manifold: g.manifold,
        shape: field.shape(),
        values,
        grid_error: field.grid_error(),
    })
}

fn circle_distance(sorted: &[f64], x: f64) -> f64 {
    let pos = sorted.partition_point(|&z| z < x);
    let n = sorted.len();
    let mut best = f64::INFINITY;
    for k in [pos + n - 1, pos] {
        let d = (sorted[k % n] - x).abs();
        best = best.min(d.min(1.0 - d));
    }
    best
}

enum Item<'a> {
    Segment(&'a [f64], &'a [f64]),
    Point(&'a [f64]),
}

struct Bins<'a> {
    grid: Grid,
    rows: Vec<Vec<Item<'a>>>,
}

impl<'a> Bins<'a> {
    fn new(grid: Grid, zs: &'a ZeroSet) -> Self {
        let mut rows: Vec<Vec<Item<'a>>> = (0..grid.n).map(|_| Vec::new()).collect();
        for ((a, b), &r) in zs.segments.iter().zip(&zs.segment_rows) {
            rows[r].push(Item::Segment(a, b));
        }
        for (p, &r) in zs.points.iter().zip(&zs.point_rows) {
            rows[r].push(Item::Point(p));
        }
        Self { grid, rows }
    }

    fn item_distance(&self, y: &[f64], item: &Item) -> f64 {
        match (self.grid.manifold, item) {
            (Manifold::Sphere, Item::Segment(a, b)) => sphere_arc_distance(as3(y), as3(a), as3(b)),
            (Manifold::Sphere, Item::Point(p)) => sphere::great_circle(as3(y), as3(p)),
            (_, Item::Segment(a, b)) => torus_segment_distance(y, a, b),
            (_, Item::Point(p)) => torus_segment_distance(y, p, p),
        }
    }

    fn nearest(&self, k: usize) -> f64 {
        let g = self.grid;
        let n = g.n;
        let row = k / g.cols();
        let y = g.point(k);
        let (spacing, periodic) = match g.manifold {
            Manifold::Sphere => (g.dtheta(), false),
            _ => (1.0 / n as f64, true),
        };
        let mut best = f64::INFINITY;
        let scan = |r: usize, best: &mut f64| {
            for item in &self.rows[r] {
                *best = best.min(self.item_distance(&y, item));
            }
        };
        scan(row, &mut best);
        for step in 1..n {
            if (step as f64 - 1.0) * spacing > best {
                break;
            }
            if periodic {
                if 2 * step > n {
                    break;
                }
                scan((row + step) % n, &mut best);
                if 2 * step != n {
                    scan((row + n - step) % n, &mut best);
                }
            } else {
                if row + step < n {
                    scan(row + step, &mut best);
                }
                if step <= row {
                    scan(row - step, &mut best);
                }
                if row + step >= n && step > row {
                    break;
                }
            }
        }
        best
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nodal::{density_radius, extract_zero_set, sample, sample_with_workers};
    use crate::spectral::{zonal_harmonic, EigenSum, Mode, Term};
    use std::f64::consts::PI;

    #[test]
    fn circle_examples() {
        let zeros = vec![0.0, 0.5];
        assert_eq!(circle_distance(&zeros, 0.25), 0.25);
        assert!((circle_distance(&[0.9], 0.05) - 0.15).abs() < 1e-15);
        assert!((circle_distance(&[0.1, 0.9], 0.5) - 0.4).abs() < 1e-15);
    }

    #[test]
    fn segment_distance_wraps() {
        let d = torus_segment_distance(&[0.02, 0.5], &[0.95, 0.4], &[0.95, 0.6]);
        assert!((d - 0.07).abs() < 1e-15);
        let d = torus_segment_distance(&[0.5, 0.5], &[0.2, 0.1], &[0.2, 0.1]);
        assert!((d - 0.5).abs() < 1e-15);
    }

    #[test]
    fn arc_distance() {
        let n = [0.0, 0.0, 1.0];
        let a = [1.0, 0.0, 0.0];
        let b = [0.0, 1.0, 0.0];
        assert!((sphere_arc_distance(n, a, b) - PI / 2.0).abs() < 1e-15);
        let p = sphere::from_angles(PI / 2.0 - 0.1, PI / 4.0);
        assert!((sphere_arc_distance(p, a, b) - 0.1).abs() < 1e-14);
        let q = sphere::from_angles(PI / 2.0, PI);
        assert!((sphere_arc_distance(q, a, b) - PI / 2.0).abs() < 1e-14);
    }

    #[test]
    fn sine_density_radius() {
        let field = sample(&EigenSum::sine(1, 1.0), 64).unwrap();
        let zs = extract_zero_set(&field).unwrap();
        let df = compute(&field, &zs).unwrap();
        assert_eq!(df.values()[16], 0.25);
        let dr = density_radius(&df);
        assert!((dr.radius - 0.25).abs() <= dr.grid_error);
        assert!(compute(&field, &ZeroSet { points: vec![], ..zs }).is_err());
    }

    fn brute_force(field: &ScalarGridField, zs: &ZeroSet) -> Vec<f64> {
        let g = field.grid();
        let bins = Bins::new(g, zs);
        (0..field.values().len())
            .map(|k| {
                let y = g.point(k);
                bins.rows.iter().flatten().map(|it| bins.item_distance(&y, it)).fold(f64::INFINITY, f64::min)
            })
            .collect()
    }

    #[test]
    fn binned_search_matches_brute_force() {
        let f = EigenSum::torus(
            2,
            vec![Term::new(1.0, Mode::sin([1, 0])), Term::new(1.0, Mode::sin([0, 1]))],
        )
        .unwrap();
        let field = sample(&f, 40).unwrap();
        let zs = extract_zero_set(&field).unwrap();
        assert_eq!(compute(&field, &zs).unwrap().values(), &brute_force(&field, &zs)[..]);

        let (z3, _) = zonal_harmonic(3, sphere::from_angles(0.4, 1.0)).unwrap();
        let field = sample(&z3, 33).unwrap();
        let zs = extract_zero_set(&field).unwrap();
        assert_eq!(compute(&field, &zs).unwrap().values(), &brute_force(&field, &zs)[..]);
    }

    #[test]
    fn diagonal_lines_density_radius() {
        // zero set: x+y ∈ ℤ and x−y ∈ ½+ℤ; farthest points at distance 1/(2√2)
        let f = EigenSum::torus(
            2,
            vec![Term::new(1.0, Mode::sin([1, 0])), Term::new(1.0, Mode::sin([0, 1]))],
        )
        .unwrap();
        let field = sample(&f, 128).unwrap();
        let dr = density_radius(&compute(&field, &extract_zero_set(&field).unwrap()).unwrap());
        let want = 1.0 / (2.0 * 2f64.sqrt());
        assert!((dr.radius - want).abs() <= dr.grid_error, "{dr:?}");
        // independent oracle: grid max of the min distance to the exact lines
        let mut oracle: f64 = 0.0;
        for i in 0..128 {
            for j in 0..128 {
                let (x, y) = (i as f64 / 128.0, j as f64 / 128.0);
                let s = x + y;
                let t = x - y - 0.5;
                let d1 = (s - s.round()).abs() / 2f64.sqrt();
                let d2 = (t - t.round()).abs() / 2f64.sqrt();
                oracle = oracle.max(d1.min(d2));
            }
        }
        assert!((dr.radius - oracle).abs() <= dr.grid_error);
    }

    #[test]
    fn sphere_examples() {
        let (y10, _) = zonal_harmonic(1, [0.0, 0.0, 1.0]).unwrap();
        for n in [33, 40] {
            let field = sample(&y10, n).unwrap();
            let df = compute(&field, &extract_zero_set(&field).unwrap()).unwrap();
            assert!((df.values()[0] - PI / 2.0).abs() <= field.grid_error());
            let dr = density_radius(&df);
            assert!((dr.radius - PI / 2.0).abs() <= dr.grid_error);
        }
    }

    #[test]
    fn lipschitz_and_worker_independent() {
        let f = EigenSum::torus(
            2,
            vec![Term::new(1.0, Mode::cos([2, 1])), Term::new(0.6, Mode::sin([1, -3]))],
        )
        .unwrap();
        let a = sample_with_workers(&f, 64, 1).unwrap();
        let b = sample_with_workers(&f, 64, 3).unwrap();
        let da = compute(&a, &extract_zero_set(&a).unwrap()).unwrap();
        let db = compute(&b, &extract_zero_set(&b).unwrap()).unwrap();
        assert_eq!(da, db);
        let g = a.grid();
        for k in 0..da.values().len() {
            for w in g.neighbours(k) {
                assert!((da.values()[k] - da.values()[w]).abs() <= 1.0 / 64.0 + 1e-12);
            }
        }
    }

    #[test]
    fn refinement_changes_radius_by_less_than_two_diagonals() {
        let f = EigenSum::torus(
            2,
            vec![Term::new(1.0, Mode::cos([1, 2])), Term::new(-0.8, Mode::sin([3, 0])), Term::new(0.2, Mode::cos([0, 0]))],
        )
        .unwrap();
        let coarse = sample(&f, 40).unwrap();
        let fine = sample(&f, 80).unwrap();
        let rc = density_radius(&compute(&coarse, &extract_zero_set(&coarse).unwrap()).unwrap());
        let rf = density_radius(&compute(&fine, &extract_zero_set(&fine).unwrap()).unwrap());
        assert!((rc.radius - rf.radius).abs() < 4.0 * rc.grid_error);
    }
}
