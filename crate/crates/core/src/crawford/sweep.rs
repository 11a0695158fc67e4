//! Field of values of a matrix on a (weighted) Hilbert space.
//!
//! In coordinates `y = Wx` the operator is `M = W T W^-1` and
//! `x*(Tx) = y^H M y`. The support function of `W(M)` in direction `e^{-i theta}`
//! is `g(theta) = lambda_max(Re(e^{i theta} M))`, so
//! `nu = max g` and, when `0` is outside `W(M)`, `c = -min g`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigen, hermitian_part, normalize_phase};
use crate::oper::Operator;
use crate::search::local_search;
use crate::space::{barycentric_origin, Field, Vector};

use super::{objective, Quantity};

/// One sample of the boundary of the numerical range.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryPoint {
    pub theta: f64,
    /// A boundary point of `W(T)` maximizing `Re(e^{i theta} z)`.
    pub point: C64,
    /// `lambda_max(Re(e^{i theta} T))`.
    pub support: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepOutcome {
    pub c: f64,
    pub nu: f64,
    pub boundary: Vec<BoundaryPoint>,
    pub(crate) c_point: Vec<C64>,
    pub(crate) nu_point: Vec<C64>,
}

impl SweepOutcome {
    /// Unit vector at which `|x*(Tx)|` is (nearly) `c`.
    pub fn crawford_point(&self) -> Vector {
        Vector::new(self.c_point.clone())
    }

    /// Unit vector at which `|x*(Tx)|` is (nearly) `nu`.
    pub fn radius_point(&self) -> Vector {
        Vector::new(self.nu_point.clone())
    }
}

fn rotated_top(m: &DMatrix<C64>, theta: f64) -> (f64, DVector<C64>) {
    let h = hermitian_part(&(m * C64::from_polar(1.0, theta)));
    let (vals, vecs) = hermitian_eigen(&h);
    let k = vals.len() - 1;
    (vals[k], vecs[k].clone())
}

fn rayleigh(m: &DMatrix<C64>, v: &DVector<C64>) -> C64 {
    v.dotc(&(m * v))
}

/// Golden-section minimization of a unimodal function on `[a, b]`.
fn golden_min<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64) -> f64 {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = b - r * (b - a);
    let mut x2 = a + r * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..200 {
        if b - a < 1e-13 {
            break;
        }
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - r * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + r * (b - a);
            f2 = f(x2);
        }
    }
    if f1 <= f2 {
        x1
    } else {
        x2
    }
}

/// Samples `g` at `samples` equally spaced angles and locates `c` and `nu`
/// with certificates. Requires `p = 2`.
pub fn hilbert_sweep(t: &Operator, samples: usize) -> Result<SweepOutcome> {
    let space = t.space();
    if !space.is_hilbert() {
        return Err(Error::NotHilbert { p: space.exponent().to_string() });
    }
    if samples < 3 {
        return Err(Error::InvalidArgument("sweep needs at least 3 samples".into()));
    }
    let m = t.unweighted_matrix();
    let two_pi = 2.0 * std::f64::consts::PI;
    let mut boundary = Vec::with_capacity(samples);
    let mut vecs = Vec::with_capacity(samples);
    for k in 0..samples {
        let theta = two_pi * k as f64 / samples as f64;
        let (support, v) = rotated_top(&m, theta);
        boundary.push(BoundaryPoint { theta, point: rayleigh(&m, &v), support });
        vecs.push(v);
    }

    let (c, nu, c_y, nu_y) = match space.field() {
        Field::Real => real_extremes(&m),
        Field::Complex => complex_extremes(&m, &boundary, &vecs),
    };
    let to_x = |y: DVector<C64>| -> Vec<C64> {
        let mut x: Vec<C64> = y.iter().enumerate().map(|(i, c)| c / space.weight(i)).collect();
        normalize_phase(&mut x);
        if space.field() == Field::Real {
            x.iter_mut().for_each(|c| c.im = 0.0);
        }
        let nrm = space.norm_of(&x);
        x.iter_mut().for_each(|c| *c /= nrm);
        x
    };
    let mut c_point = to_x(c_y);
    if c == 0.0 {
        // the inverse construction is exact up to rounding; tidy the residue
        let obj = objective(t, Quantity::Crawford);
        if obj(&c_point) > 1e-14 {
            c_point = local_search(space, &obj, &c_point, 1e-6, 1e-16).1;
        }
    }
    Ok(SweepOutcome { c, nu, boundary, c_point, nu_point: to_x(nu_y) })
}

/// Over the reals `W(M)` is the interval `[lambda_min, lambda_max]` of `Re M`.
fn real_extremes(m: &DMatrix<C64>) -> (f64, f64, DVector<C64>, DVector<C64>) {
    let (vals, vecs) = hermitian_eigen(&hermitian_part(m));
    let n = vals.len();
    let real = |v: &DVector<C64>| {
        let mut w: Vec<C64> = v.iter().copied().collect();
        normalize_phase(&mut w);
        let w = DVector::from_iterator(w.len(), w.into_iter().map(|c| C64::new(c.re, 0.0)));
        let nrm = w.norm();
        w / C64::new(nrm, 0.0)
    };
    let (lo, hi) = (vals[0], vals[n - 1]);
    let (vlo, vhi) = (real(&vecs[0]), real(&vecs[n - 1]));
    let nu_y = if hi.abs() >= lo.abs() { vhi.clone() } else { vlo.clone() };
    let nu = lo.abs().max(hi.abs());
    if lo > 0.0 {
        (lo, nu, vlo, nu_y)
    } else if hi < 0.0 {
        (-hi, nu, vhi, nu_y)
    } else {
        let span = hi - lo;
        let y = if span == 0.0 {
            vlo
        } else {
            // x = a v_min + b v_max with a^2 lo + b^2 hi = 0, a^2 + b^2 = 1
            vlo * C64::new((hi / span).sqrt(), 0.0) + vhi * C64::new((-lo / span).sqrt(), 0.0)
        };
        (0.0, nu, y, nu_y)
    }
}

fn complex_extremes(
    m: &DMatrix<C64>,
    boundary: &[BoundaryPoint],
    vecs: &[DVector<C64>],
) -> (f64, f64, DVector<C64>, DVector<C64>) {
    let k = boundary.len();
    let h = 2.0 * std::f64::consts::PI / k as f64;
    let argbest = |better: &dyn Fn(f64, f64) -> bool| {
        (0..k).fold(0, |b, i| if better(boundary[i].support, boundary[b].support) { i } else { b })
    };

    let kmax = argbest(&|a, b| a > b);
    let th = boundary[kmax].theta;
    let tmax = golden_min(|s| -rotated_top(m, s).0, th - h, th + h);
    let (gmax, vmax) = rotated_top(m, tmax);
    let (nu, nu_y) = if gmax >= boundary[kmax].support {
        (gmax, vmax)
    } else {
        (boundary[kmax].support, vecs[kmax].clone())
    };

    let kmin = argbest(&|a, b| a < b);
    let th = boundary[kmin].theta;
    let tmin = golden_min(|s| rotated_top(m, s).0, th - h, th + h);
    let (gmin, vmin) = rotated_top(m, tmin);
    let (gmin, vmin) = if gmin <= boundary[kmin].support {
        (gmin, vmin)
    } else {
        (boundary[kmin].support, vecs[kmin].clone())
    };
    if gmin < 0.0 {
        return (-gmin, nu, vmin, nu_y);
    }
    let pts: Vec<C64> = boundary.iter().map(|b| b.point).collect();
    let y = zero_preimage(m, &pts, vecs).unwrap_or(vmin);
    (0.0, nu, y, nu_y)
}

/// A unit vector `y` with `y^H M y = 0`, given boundary points `pts[k]`
/// of `W(M)` attained at `vecs[k]` and `0` in `W(M)`.
fn zero_preimage(m: &DMatrix<C64>, pts: &[C64], vecs: &[DVector<C64>]) -> Option<DVector<C64>> {
    let k = pts.len();
    for i in 1..k.saturating_sub(1) {
        if let Some([a, b, c]) = barycentric_origin(pts[0], pts[i], pts[i + 1]) {
            if b + c <= 1e-15 {
                return Some(vecs[0].clone());
            }
            let _ = a;
            let q = (pts[i] * b + pts[i + 1] * c) / (b + c);
            let z1 = preimage_in_span(m, &vecs[i], &vecs[i + 1], q)?;
            return preimage_in_span(m, &vecs[0], &z1, C64::new(0.0, 0.0));
        }
    }
    // degenerate range (a segment): use the pair whose chord passes closest to 0
    let mut best: Option<(f64, usize, usize, C64)> = None;
    for i in 0..k {
        for j in i + 1..k {
            let d = pts[j] - pts[i];
            let dd = d.norm_sqr();
            let s = if dd == 0.0 { 0.0 } else { (-(pts[i].conj() * d).re / dd).clamp(0.0, 1.0) };
            let q = pts[i] + d * s;
            if best.is_none_or(|b| q.norm() < b.0) {
                best = Some((q.norm(), i, j, q));
            }
        }
    }
    let (_, i, j, q) = best?;
    preimage_in_span(m, &vecs[i], &vecs[j], q)
}

/// A unit vector in `span{u, v}` whose Rayleigh quotient is `target`, when
/// `target` lies in the field of values of the compression (an ellipse).
fn preimage_in_span(m: &DMatrix<C64>, u: &DVector<C64>, v: &DVector<C64>, target: C64) -> Option<DVector<C64>> {
    let q1 = u / C64::new(u.norm(), 0.0);
    let w = v - &q1 * q1.dotc(v);
    if w.norm() < 1e-12 {
        return Some(q1);
    }
    let q2 = &w / C64::new(w.norm(), 0.0);
    let mq1 = m * &q1;
    let mq2 = m * &q2;
    let a = DMatrix::from_row_slice(
        2,
        2,
        &[q1.dotc(&mq1) - target, q1.dotc(&mq2), q2.dotc(&mq1), q2.dotc(&mq2) - target],
    );
    let hp = hermitian_part(&a);
    let kp = (&a - a.adjoint()) * C64::new(0.0, -0.5);
    let scale = a.iter().map(|c| c.norm()).fold(1e-300, f64::max);

    let (hv, he) = hermitian_eigen(&hp);
    let z = if hv[1] - hv[0] <= 1e-14 * scale {
        // Re part is (nearly) a multiple of identity; balance the Im part alone
        let (kv, ke) = hermitian_eigen(&kp);
        if kv[0] > 1e-12 * scale || kv[1] < -1e-12 * scale {
            return None;
        }
        let c2 = if kv[1] - kv[0] <= 0.0 { 1.0 } else { (kv[1] / (kv[1] - kv[0])).clamp(0.0, 1.0) };
        &ke[0] * C64::new(c2.sqrt(), 0.0) + &ke[1] * C64::new((1.0 - c2).sqrt(), 0.0)
    } else {
        if hv[0] > 1e-12 * scale || hv[1] < -1e-12 * scale {
            return None;
        }
        let c2 = (hv[1] / (hv[1] - hv[0])).clamp(0.0, 1.0);
        let (c, s) = (c2.sqrt(), (1.0 - c2).sqrt());
        let e0 = &he[0];
        let e1 = &he[1];
        let k11 = e0.dotc(&(&kp * e0)).re;
        let k22 = e1.dotc(&(&kp * e1)).re;
        let k12 = e0.dotc(&(&kp * e1));
        let rhs = -(k11 * c2 + k22 * s * s);
        let denom = 2.0 * c * s * k12.norm();
        let phi = if denom <= 1e-300 {
            0.0
        } else {
            (rhs / denom).clamp(-1.0, 1.0).acos() - k12.arg()
        };
        e0 * C64::new(c, 0.0) + e1 * C64::from_polar(s, phi)
    };
    let y = &q1 * z[0] + &q2 * z[1];
    let nrm = y.norm();
    Some(y / C64::new(nrm, 0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::SpaceDescriptor;

    fn c2() -> SpaceDescriptor {
        SpaceDescriptor::lp(2, Field::Complex, 2.0).unwrap()
    }

    #[test]
    fn golden_finds_parabola_min() {
        let x = golden_min(|x| (x - 0.3).powi(2), -1.0, 2.0);
        assert!((x - 0.3).abs() < 1e-6);
    }

    #[test]
    fn nilpotent_disc() {
        // W of [[0, 2], [0, 0]] is the closed disc of radius 1
        let z = C64::new(0.0, 0.0);
        let t = Operator::from_rows(c2(), &[vec![z, C64::new(2.0, 0.0)], vec![z, z]]).unwrap();
        let sw = hilbert_sweep(&t, 360).unwrap();
        assert!((sw.nu - 1.0).abs() < 1e-10);
        assert_eq!(sw.c, 0.0);
        for b in &sw.boundary {
            assert!((b.point.norm() - 1.0).abs() < 1e-10);
        }
        let m = t.unweighted_matrix();
        let y = DVector::from_vec(sw.c_point.clone());
        assert!(rayleigh(&m, &y).norm() < 1e-13);
    }

    #[test]
    fn preimage_of_interior_point() {
        let i = C64::new(0.0, 1.0);
        let m = DMatrix::from_row_slice(2, 2, &[C64::new(1.0, 0.0), C64::new(0.5, 0.0), C64::new(0.0, 0.0), -i]);
        let u = DVector::from_vec(vec![C64::new(1.0, 0.0), C64::new(0.0, 0.0)]);
        let v = DVector::from_vec(vec![C64::new(0.0, 0.0), C64::new(1.0, 0.0)]);
        let target = C64::new(0.4, -0.4);
        let y = preimage_in_span(&m, &u, &v, target).unwrap();
        assert!((rayleigh(&m, &y) - target).norm() < 1e-12);
        assert!((y.norm() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn normal_matrix_triangle() {
        // W(diag(1, i, -1-i)) is the triangle on the eigenvalues, containing 0
        let s = SpaceDescriptor::lp(3, Field::Complex, 2.0).unwrap();
        let z = C64::new(0.0, 0.0);
        let t = Operator::from_rows(
            s,
            &[
                vec![C64::new(1.0, 0.0), z, z],
                vec![z, C64::new(0.0, 1.0), z],
                vec![z, z, C64::new(-1.0, -1.0)],
            ],
        )
        .unwrap();
        let sw = hilbert_sweep(&t, 720).unwrap();
        assert_eq!(sw.c, 0.0);
        assert!((sw.nu - 2f64.sqrt()).abs() < 1e-10);
        let m = t.unweighted_matrix();
        let y = DVector::from_vec(sw.c_point.clone());
        assert!(rayleigh(&m, &y).norm() < 1e-13);
    }

    #[test]
    fn rejects_non_hilbert() {
        let s = SpaceDescriptor::lp(2, Field::Real, 3.0).unwrap();
        assert!(matches!(hilbert_sweep(&Operator::identity(s), 100), Err(Error::NotHilbert { .. })));
    }
}
