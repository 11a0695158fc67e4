//! Minimum-attaining perturbations of a linear functional on a polytope
//! given by its vertices, and Wolfe's minimum-norm-point procedure.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::space::{Functional, Vector};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PolytopeCase {
    /// The functional has constant sign on `C`; its minimum is at a vertex.
    SignDefinite,
    /// A vertex already has value zero.
    VertexZero,
    /// `0` lies in `C`.
    ContainsOrigin,
    /// The zero level set crosses `C` away from the origin.
    Constructed,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PolytopeOutcome {
    pub xstar: Functional,
    pub attain_point: Vector,
    /// `|xstar(attain_point)|`.
    pub min_value: f64,
    pub case: PolytopeCase,
    /// Distance from `0` to the slab `{x in C : |x0star(x)| <= eps}`, when constructed.
    pub lambda: Option<f64>,
}

fn dotr(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Nearest point of the affine hull of `pts` to the origin, as affine weights.
fn affine_min(pts: &[&[f64]]) -> Option<Vec<f64>> {
    let k = pts.len();
    if k == 1 {
        return Some(vec![1.0]);
    }
    let d = pts[0].len();
    // x = p0 + D beta, least squares in beta
    let dm = DMatrix::from_fn(d, k - 1, |r, c| pts[c + 1][r] - pts[0][r]);
    let p0 = DVector::from_fn(d, |r, _| -pts[0][r]);
    let svd = dm.svd(true, true);
    let smax = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let beta = svd.solve(&p0, 1e-13 * smax.max(1e-300)).ok()?;
    let mut w = Vec::with_capacity(k);
    w.push(1.0 - beta.iter().sum::<f64>());
    w.extend(beta.iter().copied());
    w.iter().all(|v| v.is_finite()).then_some(w)
}

/// Minimum-norm point of the convex hull of `points` (Wolfe's procedure).
/// Returns the point and its convex weights.
pub fn min_norm_point(points: &[Vec<f64>]) -> Result<(Vec<f64>, Vec<f64>)> {
    let m = points.len();
    if m == 0 {
        return Err(Error::EmptyInput("no points".into()));
    }
    let d = points[0].len();
    if points.iter().any(|p| p.len() != d) {
        return Err(Error::DimensionMismatch { expected: d, found: points.iter().find(|p| p.len() != d).unwrap().len() });
    }
    let scale = points.iter().map(|p| dotr(p, p)).fold(0.0, f64::max).max(1e-300);
    let combine = |set: &[usize], lam: &[f64]| {
        let mut x = vec![0.0; d];
        for (&i, &l) in set.iter().zip(lam) {
            for (xc, pc) in x.iter_mut().zip(&points[i]) {
                *xc += l * pc;
            }
        }
        x
    };

    let first = (0..m).fold(0, |b, i| if dotr(&points[i], &points[i]) < dotr(&points[b], &points[b]) { i } else { b });
    let mut set = vec![first];
    let mut lam = vec![1.0];
    let mut x = points[first].clone();

    for _ in 0..(50 * (m + d) + 100) {
        let xx = dotr(&x, &x);
        let j = (0..m).fold(0, |b, i| if dotr(&x, &points[i]) < dotr(&x, &points[b]) { i } else { b });
        if xx - dotr(&x, &points[j]) <= 1e-13 * scale || set.contains(&j) || xx <= 1e-28 * scale {
            break;
        }
        set.push(j);
        lam.push(0.0);
        loop {
            let refs: Vec<&[f64]> = set.iter().map(|&i| points[i].as_slice()).collect();
            let Some(alpha) = affine_min(&refs) else { break };
            if alpha.iter().all(|&a| a > 1e-14) {
                lam = alpha;
                x = combine(&set, &lam);
                break;
            }
            let mut theta = 1.0f64;
            for (l, a) in lam.iter().zip(&alpha) {
                if *a <= 1e-14 && l - a > 0.0 {
                    theta = theta.min(l / (l - a));
                }
            }
            for (l, a) in lam.iter_mut().zip(&alpha) {
                *l += theta * (a - *l);
            }
            let mut keep_set = Vec::new();
            let mut keep_lam = Vec::new();
            for (&i, &l) in set.iter().zip(&lam) {
                if l > 1e-14 {
                    keep_set.push(i);
                    keep_lam.push(l);
                }
            }
            if keep_set.is_empty() {
                break;
            }
            let total: f64 = keep_lam.iter().sum();
            keep_lam.iter_mut().for_each(|l| *l /= total);
            set = keep_set;
            lam = keep_lam;
            x = combine(&set, &lam);
        }
    }
    let mut weights = vec![0.0; m];
    for (&i, &l) in set.iter().zip(&lam) {
        weights[i] += l;
    }
    Ok((x, weights))
}

/// Vertices of `C` intersected with the hyperplane `l(x) = level`.
fn slice_points(points: &[Vec<f64>], values: &[f64], level: f64) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = Vec::new();
    for (p, v) in points.iter().zip(values) {
        if *v == level {
            out.push(p.clone());
        }
    }
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            let (a, b) = (values[i] - level, values[j] - level);
            if (a < 0.0 && b > 0.0) || (a > 0.0 && b < 0.0) {
                let s = a / (a - b);
                out.push(points[i].iter().zip(&points[j]).map(|(x, y)| x + s * (y - x)).collect());
            }
        }
    }
    out
}

/// Vertices of `C` intersected with the slab `lo <= l(x) <= hi`.
fn slab_points(points: &[Vec<f64>], values: &[f64], lo: f64, hi: f64) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> =
        points.iter().zip(values).filter(|(_, v)| **v >= lo && **v <= hi).map(|(p, _)| p.clone()).collect();
    out.extend(slice_points(points, values, lo));
    out.extend(slice_points(points, values, hi));
    out
}

/// A perturbation `x*` of `x0star` within `eps` (Euclidean) whose absolute
/// value attains its minimum over `C = conv(points)`. Real field only.
pub fn min_attain_polytope(points: &[Vector], x0star: &Functional, eps: f64) -> Result<PolytopeOutcome> {
    if points.is_empty() {
        return Err(Error::EmptyInput("polytope needs at least one vertex".into()));
    }
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::InvalidArgument(format!("eps must be positive, got {eps}")));
    }
    let d = x0star.dim();
    for p in points {
        if p.dim() != d {
            return Err(Error::DimensionMismatch { expected: d, found: p.dim() });
        }
    }
    let all_real = points.iter().flat_map(|p| p.coords()).chain(x0star.coords()).all(|c| c.im == 0.0 && c.re.is_finite());
    if !all_real {
        return Err(Error::InvalidArgument("polytope construction needs real finite data".into()));
    }
    let pts: Vec<Vec<f64>> = points.iter().map(|p| p.re()).collect();
    let f = x0star.re();
    let values: Vec<f64> = pts.iter().map(|p| dotr(&f, p)).collect();
    let vmin = values.iter().copied().fold(f64::INFINITY, f64::min);
    let vmax = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let vertex = |i: usize, case| PolytopeOutcome {
        xstar: x0star.clone(),
        attain_point: points[i].clone(),
        min_value: values[i].abs(),
        case,
        lambda: None,
    };

    if vmin > 0.0 || vmax < 0.0 {
        let i = (0..pts.len()).fold(0, |b, i| if values[i].abs() < values[b].abs() { i } else { b });
        return Ok(vertex(i, PolytopeCase::SignDefinite));
    }
    if let Some(i) = values.iter().position(|v| *v == 0.0) {
        return Ok(vertex(i, PolytopeCase::VertexZero));
    }
    let (nearest, _) = min_norm_point(&pts)?;
    let scale = pts.iter().map(|p| dotr(p, p).sqrt()).fold(0.0, f64::max);
    if dotr(&nearest, &nearest).sqrt() <= 1e-12 * scale.max(1.0) {
        return Ok(PolytopeOutcome {
            xstar: x0star.clone(),
            attain_point: Vector::zeros(d),
            min_value: 0.0,
            case: PolytopeCase::ContainsOrigin,
            lambda: None,
        });
    }

    let (slab_near, _) = min_norm_point(&slab_points(&pts, &values, -eps, eps))?;
    let lambda = dotr(&slab_near, &slab_near).sqrt();
    let (x0, _) = min_norm_point(&slice_points(&pts, &values, 0.0))?;
    let x0_sq = dotr(&x0, &x0);
    let r = dotr(&f, &x0);
    if !(r.abs() < lambda * eps) {
        return Err(Error::NonConvergent { step: 0, reason: format!("zero-level point has |x0*(x0)| = {r:e}") });
    }
    // x* = x0* - (z*(.) / z*(x0)) x0*(x0) with z* = x0^T / |x0|
    let xs: Vec<f64> = f.iter().zip(&x0).map(|(fi, xi)| fi - r * xi / x0_sq).collect();
    let xstar = Functional::from_real(&xs);
    let attain_point = Vector::from_real(&x0);
    let min_value = dotr(&xs, &x0).abs();
    Ok(PolytopeOutcome { xstar, attain_point, min_value, case: PolytopeCase::Constructed, lambda: Some(lambda) })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(c: &[f64]) -> Vector {
        Vector::from_real(c)
    }

    /// Affine weights from the bordered Gram system, solved by LU.
    fn bordered(pts: &[&[f64]]) -> Option<Vec<f64>> {
        let k = pts.len();
        let mut a = DMatrix::<f64>::zeros(k + 1, k + 1);
        let mut b = DVector::<f64>::zeros(k + 1);
        for i in 0..k {
            for j in 0..k {
                a[(i, j)] = dotr(pts[i], pts[j]);
            }
            a[(i, k)] = 1.0;
            a[(k, i)] = 1.0;
        }
        b[k] = 1.0;
        let sol = a.lu().solve(&b)?;
        let w: Vec<f64> = sol.iter().take(k).copied().collect();
        w.iter().all(|v| v.is_finite() && v.abs() < 1e8).then_some(w)
    }

    /// Brute force: best point over all affine projections of subsets of size <= 4.
    fn brute_min_norm(points: &[Vec<f64>]) -> f64 {
        let m = points.len();
        let mut best = points.iter().map(|p| dotr(p, p).sqrt()).fold(f64::INFINITY, f64::min);
        let mut subsets: Vec<Vec<usize>> = Vec::new();
        for i in 0..m {
            for j in i + 1..m {
                subsets.push(vec![i, j]);
                for k in j + 1..m {
                    subsets.push(vec![i, j, k]);
                    for l in k + 1..m {
                        subsets.push(vec![i, j, k, l]);
                    }
                }
            }
        }
        for s in subsets {
            let refs: Vec<&[f64]> = s.iter().map(|&i| points[i].as_slice()).collect();
            if let Some(w) = bordered(&refs) {
                if w.iter().all(|x| *x >= -1e-12) {
                    let mut x = vec![0.0; points[0].len()];
                    for (&i, wi) in s.iter().zip(&w) {
                        for (xc, pc) in x.iter_mut().zip(&points[i]) {
                            *xc += wi * pc;
                        }
                    }
                    best = best.min(dotr(&x, &x).sqrt());
                }
            }
        }
        best
    }

    #[test]
    fn wolfe_matches_brute_force() {
        use rand::Rng;
        let mut rng = crate::rng::seeded(11);
        for _ in 0..200 {
            let d = rng.gen_range(1..=3);
            let m = rng.gen_range(1..=6);
            let pts: Vec<Vec<f64>> =
                (0..m).map(|_| (0..d).map(|_| rng.gen_range(-1.0..2.0)).collect()).collect();
            let (x, w) = min_norm_point(&pts).unwrap();
            let got = dotr(&x, &x).sqrt();
            assert!((got - brute_min_norm(&pts)).abs() < 1e-9, "{pts:?}");
            assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            assert!(w.iter().all(|x| *x >= 0.0));
        }
    }

    #[test]
    fn vertex_zero_example() {
        let out = min_attain_polytope(&[v(&[1.0, 0.0]), v(&[2.0, 1.0])], &Functional::from_real(&[0.0, 1.0]), 0.1).unwrap();
        assert_eq!(out.case, PolytopeCase::VertexZero);
        assert_eq!(out.attain_point, v(&[1.0, 0.0]));
        assert_eq!(out.xstar, Functional::from_real(&[0.0, 1.0]));
    }

    #[test]
    fn sign_definite_example() {
        let out = min_attain_polytope(&[v(&[1.0, 0.0]), v(&[1.0, 1.0])], &Functional::from_real(&[1.0, 0.0]), 0.1).unwrap();
        assert_eq!(out.case, PolytopeCase::SignDefinite);
        assert_eq!(out.attain_point, v(&[1.0, 0.0]));
        assert_eq!(out.min_value, 1.0);
    }

    #[test]
    fn constructed_example() {
        let f = Functional::from_real(&[0.05, 1.0]);
        let out = min_attain_polytope(&[v(&[1.0, -1.0]), v(&[1.0, 1.0])], &f, 0.5).unwrap();
        assert_eq!(out.case, PolytopeCase::Constructed);
        let p = out.attain_point.re();
        assert!((p[0] - 1.0).abs() < 1e-15 && (p[1] + 0.05).abs() < 1e-15);
        assert!(out.min_value < 1e-15);
        let dist = out.xstar.sub(&f).re().iter().map(|x| x * x).sum::<f64>().sqrt();
        assert!(dist <= 0.5);
        assert!((out.lambda.unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn origin_inside() {
        let pts = [v(&[1.0, 1.0]), v(&[-1.0, 1.0]), v(&[0.0, -1.0])];
        let out = min_attain_polytope(&pts, &Functional::from_real(&[0.3, 1.0]), 0.1).unwrap();
        assert_eq!(out.case, PolytopeCase::ContainsOrigin);
        assert_eq!(out.attain_point, Vector::zeros(2));
    }

    #[test]
    fn empty_polytope() {
        assert!(matches!(min_attain_polytope(&[], &Functional::from_real(&[1.0]), 0.1), Err(Error::EmptyInput(_))));
    }
}
