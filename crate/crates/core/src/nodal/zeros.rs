//! Zero-set extraction: sign-change bisection on the circle, marching squares
//! on the 2-torus and on the latitude-longitude sphere grid.

use crate::nodal::{Grid, ScalarGridField};
use crate::spectral::Manifold;
use crate::{Error, Result};

/// Nodes with `|f| ≤ VANISH · ‖f‖∞` are recorded as point zeros.
pub(crate) const VANISH: f64 = 1e-12;

/// Zero crossings merged when closer than this on the circle.
const MERGE: f64 = 1e-9;

/// Zero set of a sampled field.
///
/// `segments` are straight pieces in the parameter plane mapped to the
/// manifold (torus coordinates may exceed 1 by one cell where a segment
/// wraps); `points` are isolated zeros: bisected roots on the circle and
/// grid nodes where `f` vanishes. `cells[k]` is the grid row (sphere:
/// colatitude band; torus: first-axis column) that produced `segments[k]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ZeroSet {
    pub manifold: Manifold,
    pub segments: Vec<(Vec<f64>, Vec<f64>)>,
    pub points: Vec<Vec<f64>>,
    pub(crate) segment_rows: Vec<usize>,
    pub(crate) point_rows: Vec<usize>,
}

impl ZeroSet {
    /// True when no zero was found: the field has one strict sign.
    pub fn is_empty(&self) -> bool {
        self.segments.is_empty() && self.points.is_empty()
    }

    /// Every endpoint and isolated point.
    pub fn all_points(&self) -> Vec<Vec<f64>> {
        let mut out: Vec<Vec<f64>> = Vec::with_capacity(2 * self.segments.len() + self.points.len());
        for (a, b) in &self.segments {
            out.push(a.clone());
            out.push(b.clone());
        }
        out.extend(self.points.iter().cloned());
        out
    }
}

pub(crate) fn extract(field: &ScalarGridField) -> Result<ZeroSet> {
    match field.manifold() {
        Manifold::Torus { dim: 1 } => Ok(circle(field)),
        Manifold::Torus { dim: 2 } | Manifold::Sphere => Ok(squares(field)),
        Manifold::Torus { dim } => Err(Error::InvalidParameter(format!(
            "zero-set extraction supports torus dimension 1 or 2, got {dim}"
        ))),
    }
}

fn circle(field: &ScalarGridField) -> ZeroSet {
    let n = field.resolution();
    let v = field.values();
    let f = |x: f64| field.sum().eval(&[x]).expect("circle point");
    let tiny = VANISH * field.sup_norm();
    let h = 1.0 / n as f64;
    let mut roots: Vec<(f64, usize)> = Vec::new();
    for i in 0..n {
        if v[i].abs() <= tiny {
            roots.push((i as f64 * h, i));
        }
        let j = (i + 1) % n;
        let (neg_a, neg_b) = (v[i] < 0.0, v[j] < 0.0);
        if neg_a == neg_b {
            continue;
        }
        let (mut a, mut b) = (i as f64 * h, (i + 1) as f64 * h);
        for _ in 0..200 {
            let mid = 0.5 * (a + b);
            if mid <= a || mid >= b {
                break;
            }
            if (f(mid) < 0.0) == neg_a {
                a = mid;
            } else {
                b = mid;
            }
        }
        let x = if f(a).abs() <= f(b).abs() { a } else { b };
        roots.push((x - x.floor(), i));
    }
    roots.sort_by(|p, q| p.0.total_cmp(&q.0));
    let mut merged: Vec<(f64, usize)> = Vec::with_capacity(roots.len());
    for r in roots {
        match merged.last() {
            Some(last) if r.0 - last.0 <= MERGE => {}
            _ => merged.push(r),
        }
    }
    if merged.len() > 1 && merged[0].0 + 1.0 - merged[merged.len() - 1].0 <= MERGE {
        merged.pop();
    }
    ZeroSet {
        manifold: field.manifold(),
        segments: Vec::new(),
        points: merged.iter().map(|r| vec![r.0]).collect(),
        segment_rows: Vec::new(),
        point_rows: merged.iter().map(|r| r.1).collect(),
    }
}

/// Segment table for marching squares. Corners are `c0=(i,j)`, `c1=(i+1,j)`,
/// `c2=(i+1,j+1)`, `c3=(i,j+1)`; edges are `e0=c0c1`, `e1=c1c2`, `e2=c3c2`,
/// `e3=c0c3`; bit `k` of the case index is set when corner `k` is negative.
fn case_edges(case: u8, center_negative: bool) -> &'static [(u8, u8)] {
    match case {
        0 | 15 => &[],
        1 | 14 => &[(3, 0)],
        2 | 13 => &[(0, 1)],
        3 | 12 => &[(3, 1)],
        4 | 11 => &[(1, 2)],
        6 | 9 => &[(0, 2)],
        7 | 8 => &[(3, 2)],
        // saddles: the cell-center sign decides which diagonal pair connects
        5 => {
            if center_negative {
                &[(0, 1), (2, 3)]
            } else {
                &[(3, 0), (1, 2)]
            }
        }
        10 => {
            if center_negative {
                &[(3, 0), (1, 2)]
            } else {
                &[(0, 1), (2, 3)]
            }
        }
        _ => unreachable!("case index has four bits"),
    }
}

fn squares(field: &ScalarGridField) -> ZeroSet {
    let g: Grid = field.grid();
    let n = g.n;
    let cols = g.cols();
    let v = field.values();
    let rows = match g.manifold {
        Manifold::Sphere => n - 1,
        _ => n,
    };
    let idx = |i: usize, j: usize| (i % n) * cols + (j % cols);

    // Crossing on the edge from node (i,j) along axis 0 (dir 0) or axis 1
    // (dir 1), always interpolated from the base node so that both cells
    // sharing an edge produce identical points.
    let crossing = |i: usize, j: usize, dir: u8| -> Vec<f64> {
        let (i2, j2) = if dir == 0 { (i + 1, j) } else { (i, j + 1) };
        let (va, vb) = (v[idx(i, j)], v[idx(i2, j2)]);
        let t = va / (va - vb);
        let pa = g.param(i, j);
        let pb = g.param(i2, j2);
        g.embed([pa[0] + t * (pb[0] - pa[0]), pa[1] + t * (pb[1] - pa[1])])
    };
    let edge_point = |i: usize, j: usize, e: u8| match e {
        0 => crossing(i, j, 0),
        1 => crossing(i + 1, j, 1),
        2 => crossing(i, j + 1, 0),
        _ => crossing(i, j, 1),
    };

    let mut segments = Vec::new();
    let mut segment_rows = Vec::new();
    for i in 0..rows {
        for j in 0..cols {
            let corners = [idx(i, j), idx(i + 1, j), idx(i + 1, j + 1), idx(i, j + 1)];
            let mut case = 0u8;
            for (k, &c) in corners.iter().enumerate() {
                if field.negative(c) {
                    case |= 1 << k;
                }
            }
            if case == 0 || case == 15 {
                continue;
            }
            let center_negative = if case == 5 || case == 10 {
                let a = g.param(i, j);
                let b = g.param(i + 1, j + 1);
                let p = g.embed([0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])]);
                field.sum().eval(&p).expect("cell center on the manifold") < 0.0
            } else {
                false
            };
            for &(ea, eb) in case_edges(case, center_negative) {
                segments.push((edge_point(i, j, ea), edge_point(i, j, eb)));
                segment_rows.push(i);
            }
        }
    }

    let tiny = VANISH * field.sup_norm();
    let mut points = Vec::new();
    let mut point_rows = Vec::new();
    for (k, &val) in v.iter().enumerate() {
        if val.abs() <= tiny {
            let i = k / cols;
            if g.manifold == Manifold::Sphere && (i == 0 || i == n - 1) && k % cols != 0 {
                continue;
            }
            points.push(g.point(k));
            point_rows.push(i);
        }
    }
    ZeroSet { manifold: g.manifold, segments, points, segment_rows, point_rows }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nodal::sample;
    use crate::spectral::{EigenSum, Mode, Term};
    use proptest::prelude::*;

    fn roots(f: &EigenSum, n: usize) -> Vec<f64> {
        let zs = extract(&sample(f, n).unwrap()).unwrap();
        zs.points.iter().map(|p| p[0]).collect()
    }

    fn near_set(got: &[f64], want: &[f64], tol: f64) -> bool {
        let close = |a: f64, b: f64| {
            let d = (a - b).rem_euclid(1.0);
            d.min(1.0 - d) <= tol
        };
        got.iter().all(|&g| want.iter().any(|&w| close(g, w)))
            && want.iter().all(|&w| got.iter().any(|&g| close(g, w)))
    }

    #[test]
    fn sine_roots() {
        let r = roots(&EigenSum::sine(1, 1.0), 64);
        assert!(near_set(&r, &[0.0, 0.5], 1e-6), "{r:?}");
        assert_eq!(r.len(), 2);
        // grid not aligned with the roots
        let r = roots(&EigenSum::sine(1, 1.0), 37);
        assert!(near_set(&r, &[0.0, 0.5], 1e-12), "{r:?}");
    }

    #[test]
    fn factorized_pair_roots() {
        let f = EigenSum::torus(1, vec![Term::new(1.0, Mode::sin([1])), Term::new(0.5, Mode::sin([2]))])
            .unwrap();
        for n in [64, 37, 101] {
            let r = roots(&f, n);
            assert!(near_set(&r, &[0.0, 0.5], 1e-6), "N={n}: {r:?}");
            // oracle: dense bisection of sin(2πx)(1 + cos 2πx)
            for x in &r {
                assert!(f.eval(&[*x]).unwrap().abs() <= 1e-9 * 1.3);
            }
        }
    }

    #[test]
    fn constant_has_no_zeros() {
        let one = EigenSum::torus(1, vec![Term::new(1.0, Mode::cos([0]))]).unwrap();
        assert!(extract(&sample(&one, 16).unwrap()).unwrap().is_empty());
        let one = EigenSum::torus(2, vec![Term::new(1.0, Mode::cos([0, 0]))]).unwrap();
        assert!(extract(&sample(&one, 16).unwrap()).unwrap().is_empty());
    }

    #[test]
    fn endpoints_interpolate_to_zero() {
        let f = EigenSum::torus(
            2,
            vec![Term::new(1.0, Mode::sin([1, 0])), Term::new(0.7, Mode::cos([1, 2]))],
        )
        .unwrap();
        let field = sample(&f, 48).unwrap();
        let zs = extract(&field).unwrap();
        assert!(!zs.segments.is_empty());
        // every endpoint lies on a grid edge; bilinear value there is the
        // linear interpolant along that edge
        let n = 48.0;
        let sup = field.sup_norm();
        for p in zs.all_points() {
            let (gx, gy) = (p[0] * n, p[1] * n);
            let on_x = (gx - gx.round()).abs() < 1e-9;
            let on_y = (gy - gy.round()).abs() < 1e-9;
            assert!(on_x || on_y);
            let (i, j, t, dir) = if on_x {
                (gx.round() as usize, gy.floor() as usize, gy - gy.floor(), 1)
            } else {
                (gx.floor() as usize, gy.round() as usize, gx - gx.floor(), 0)
            };
            let at = |a: usize, b: usize| field.values()[(a % 48) * 48 + (b % 48)];
            let (va, vb) = if dir == 0 { (at(i, j), at(i + 1, j)) } else { (at(i, j), at(i, j + 1)) };
            assert!((va + t * (vb - va)).abs() <= 1e-9 * sup);
        }
    }

    fn sorted_points(zs: &ZeroSet) -> Vec<Vec<f64>> {
        let mut pts = zs.all_points();
        pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        pts
    }

    proptest! {
        #[test]
        fn negation_preserves_zero_set(
            coeffs in prop::collection::vec(-1.0f64..1.0, 4),
            phase in 0.01f64..0.2,
        ) {
            // shifted cosines keep grid nodes off exact zeros
            let terms = vec![
                Term::new(coeffs[0], Mode::cos([1, 0])),
                Term::new(coeffs[1], Mode::sin([0, 2])),
                Term::new(coeffs[2], Mode::cos([1, 1])),
                Term::new(coeffs[3], Mode::sin([2, -1])),
                Term::new(phase, Mode::cos([0, 0])),
            ];
            let f = EigenSum::torus(2, terms).unwrap();
            let field = sample(&f, 32).unwrap();
            prop_assume!(field.values().iter().all(|&v| v != 0.0));
            let a = extract(&field).unwrap();
            let b = extract(&sample(&f.scaled(-1.0), 32).unwrap()).unwrap();
            let (pa, pb) = (sorted_points(&a), sorted_points(&b));
            prop_assert_eq!(pa.len(), pb.len());
            for (p, q) in pa.iter().zip(&pb) {
                for (x, y) in p.iter().zip(q) {
                    prop_assert!((x - y).abs() <= 1e-12);
                }
            }
        }
    }
}
