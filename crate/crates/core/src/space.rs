//! Norm geometry of finite-dimensional, 1-unconditional Banach spaces.
//!
//! A [`SpaceDescriptor`] fixes a dimension, a scalar field and a norm from the
//! (weighted) `l_p` family. Vectors and functionals are plain coordinate
//! arrays; a functional acts by `x -> sum_i f_i x_i` with no implicit
//! conjugation, so Hilbert-space support functionals carry their conjugates
//! explicitly.
//!
//! The set of unit functionals norming a unit vector (its duality face) is
//! represented exactly: a single point for smooth exponents, a box of free
//! coordinates for `p = 1` and a simplex of signed coordinate functionals for
//! `p = inf`.

use std::fmt;

use num_complex::Complex64 as C64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::rng::seeded;

/// Tolerance for the state invariants `|x| = 1`, `|x*| = 1`, `x*(x) = 1`.
pub const STATE_TOL: f64 = 1e-12;

/// Relative threshold under which a coordinate counts as zero (`p = 1`) or
/// as tied with the maximum (`p = inf`).
pub(crate) const ACTIVE_TOL: f64 = 1e-13;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Field {
    Real,
    Complex,
}

impl Field {
    /// Number of real parameters per coordinate.
    pub fn real_dim(self) -> usize {
        match self {
            Field::Real => 1,
            Field::Complex => 2,
        }
    }
}

/// The exponent `p` of an `l_p` norm, `1 <= p <= inf`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Exponent {
    Finite(f64),
    Infinity,
}

impl Exponent {
    pub fn new(p: f64) -> Result<Self> {
        if p.is_nan() || p < 1.0 {
            return Err(Error::InvalidArgument(format!("exponent must satisfy p >= 1, got {p}")));
        }
        if p.is_infinite() {
            Ok(Exponent::Infinity)
        } else {
            Ok(Exponent::Finite(p))
        }
    }

    pub fn value(self) -> f64 {
        match self {
            Exponent::Finite(p) => p,
            Exponent::Infinity => f64::INFINITY,
        }
    }

    /// Hölder conjugate `q` with `1/p + 1/q = 1`.
    pub fn conjugate(self) -> Exponent {
        match self {
            Exponent::Infinity => Exponent::Finite(1.0),
            Exponent::Finite(p) if p == 1.0 => Exponent::Infinity,
            Exponent::Finite(p) if p == 2.0 => Exponent::Finite(2.0),
            Exponent::Finite(p) => Exponent::Finite(p / (p - 1.0)),
        }
    }

    pub fn is_one(self) -> bool {
        self == Exponent::Finite(1.0)
    }

    pub fn is_two(self) -> bool {
        self == Exponent::Finite(2.0)
    }

    pub fn is_infinite(self) -> bool {
        self == Exponent::Infinity
    }

    /// `1 < p < inf`: the unit sphere is smooth and strictly convex.
    pub fn is_smooth(self) -> bool {
        matches!(self, Exponent::Finite(p) if p > 1.0)
    }

    fn approx_eq(self, other: Exponent) -> bool {
        match (self, other) {
            (Exponent::Infinity, Exponent::Infinity) => true,
            (Exponent::Finite(a), Exponent::Finite(b)) => (a - b).abs() <= 1e-12 * a.max(b),
            _ => false,
        }
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Exponent::Finite(p) => write!(f, "{p}"),
            Exponent::Infinity => write!(f, "inf"),
        }
    }
}

/// Norm family: `|x| = |(x_i)|_p` or `|x| = |(w_i x_i)|_p`.
#[derive(Clone, Debug, PartialEq)]
pub enum NormFamily {
    Lp(Exponent),
    WeightedLp(Exponent, Vec<f64>),
}

/// A finite-dimensional Banach space with a 1-unconditional coordinate basis.
#[derive(Clone, Debug, PartialEq)]
pub struct SpaceDescriptor {
    dim: usize,
    field: Field,
    norm: NormFamily,
}

impl SpaceDescriptor {
    pub fn new(dim: usize, field: Field, norm: NormFamily) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidArgument("dimension must be at least 1".into()));
        }
        if let NormFamily::WeightedLp(_, w) = &norm {
            if w.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, found: w.len() });
            }
            if let Some(bad) = w.iter().find(|&&wi| !(wi.is_finite() && wi > 0.0)) {
                return Err(Error::InvalidArgument(format!(
                    "weights must be finite and strictly positive, got {bad}"
                )));
            }
        }
        Ok(SpaceDescriptor { dim, field, norm })
    }

    /// Unweighted `l_p` space; `p = f64::INFINITY` selects the max norm.
    pub fn lp(dim: usize, field: Field, p: f64) -> Result<Self> {
        SpaceDescriptor::new(dim, field, NormFamily::Lp(Exponent::new(p)?))
    }

    pub fn weighted_lp(dim: usize, field: Field, p: f64, weights: Vec<f64>) -> Result<Self> {
        SpaceDescriptor::new(dim, field, NormFamily::WeightedLp(Exponent::new(p)?, weights))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn norm_family(&self) -> &NormFamily {
        &self.norm
    }

    pub fn exponent(&self) -> Exponent {
        match &self.norm {
            NormFamily::Lp(p) | NormFamily::WeightedLp(p, _) => *p,
        }
    }

    #[inline]
    pub fn weight(&self, i: usize) -> f64 {
        match &self.norm {
            NormFamily::Lp(_) => 1.0,
            NormFamily::WeightedLp(_, w) => w[i],
        }
    }

    pub fn weights(&self) -> Vec<f64> {
        (0..self.dim).map(|i| self.weight(i)).collect()
    }

    pub fn is_weighted(&self) -> bool {
        matches!(self.norm, NormFamily::WeightedLp(..))
    }

    pub fn is_hilbert(&self) -> bool {
        self.exponent().is_two()
    }

    /// The dual space under the bilinear pairing `f(x) = sum f_i x_i`.
    pub fn dual(&self) -> SpaceDescriptor {
        let norm = match &self.norm {
            NormFamily::Lp(p) => NormFamily::Lp(p.conjugate()),
            NormFamily::WeightedLp(p, w) => {
                NormFamily::WeightedLp(p.conjugate(), w.iter().map(|wi| 1.0 / wi).collect())
            }
        };
        SpaceDescriptor { dim: self.dim, field: self.field, norm }
    }

    /// Equality up to rounding in the exponent and weights.
    pub fn approx_eq(&self, other: &SpaceDescriptor) -> bool {
        self.dim == other.dim
            && self.field == other.field
            && self.exponent().approx_eq(other.exponent())
            && (0..self.dim).all(|i| {
                let (a, b) = (self.weight(i), other.weight(i));
                (a - b).abs() <= 1e-12 * a.max(b)
            })
    }

    pub(crate) fn check_dim(&self, n: usize) -> Result<()> {
        if n == self.dim {
            Ok(())
        } else {
            Err(Error::DimensionMismatch { expected: self.dim, found: n })
        }
    }

    /// Norm of raw coordinates, no dimension check.
    pub(crate) fn norm_of(&self, x: &[C64]) -> f64 {
        let weighted = |i: usize| self.weight(i) * x[i].norm();
        match self.exponent() {
            Exponent::Infinity => (0..x.len()).map(weighted).fold(0.0, f64::max),
            Exponent::Finite(p) if p == 1.0 => (0..x.len()).map(weighted).sum(),
            Exponent::Finite(p) => {
                let m = (0..x.len()).map(weighted).fold(0.0, f64::max);
                if m == 0.0 || !m.is_finite() {
                    return m;
                }
                let s: f64 = if p == 2.0 {
                    (0..x.len()).map(|i| (weighted(i) / m).powi(2)).sum()
                } else {
                    (0..x.len()).map(|i| (weighted(i) / m).powf(p)).sum()
                };
                m * if p == 2.0 { s.sqrt() } else { s.powf(1.0 / p) }
            }
        }
    }

    /// Dual norm of raw coordinates.
    pub(crate) fn dual_norm_of(&self, f: &[C64]) -> f64 {
        self.dual().norm_of(f)
    }
}

impl fmt::Display for SpaceDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let field = match self.field {
            Field::Real => "R",
            Field::Complex => "C",
        };
        if self.is_weighted() {
            write!(f, "weighted l_{}({field}^{})", self.exponent(), self.dim)
        } else {
            write!(f, "l_{}({field}^{})", self.exponent(), self.dim)
        }
    }
}

macro_rules! coord_array {
    ($name:ident) => {
        #[derive(Clone, Debug, PartialEq)]
        pub struct $name(Vec<C64>);

        impl $name {
            pub fn new(coords: Vec<C64>) -> Self {
                $name(coords)
            }

            pub fn from_real(coords: &[f64]) -> Self {
                $name(coords.iter().map(|&c| C64::new(c, 0.0)).collect())
            }

            pub fn zeros(dim: usize) -> Self {
                $name(vec![C64::new(0.0, 0.0); dim])
            }

            /// The `i`-th coordinate unit.
            pub fn basis(dim: usize, i: usize) -> Self {
                let mut v = $name::zeros(dim);
                v.0[i] = C64::new(1.0, 0.0);
                v
            }

            pub fn dim(&self) -> usize {
                self.0.len()
            }

            pub fn coords(&self) -> &[C64] {
                &self.0
            }

            pub fn coords_mut(&mut self) -> &mut [C64] {
                &mut self.0
            }

            pub fn into_coords(self) -> Vec<C64> {
                self.0
            }

            pub fn is_finite(&self) -> bool {
                self.0.iter().all(|c| c.re.is_finite() && c.im.is_finite())
            }

            pub fn scaled(&self, s: C64) -> Self {
                $name(self.0.iter().map(|c| c * s).collect())
            }

            pub fn sub(&self, other: &Self) -> Self {
                $name(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
            }

            pub fn add(&self, other: &Self) -> Self {
                $name(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
            }

            /// Real parts, for real-field callers.
            pub fn re(&self) -> Vec<f64> {
                self.0.iter().map(|c| c.re).collect()
            }

            /// Largest absolute coordinate difference.
            pub fn max_abs_diff(&self, other: &Self) -> f64 {
                self.0.iter().zip(&other.0).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
            }
        }
    };
}

coord_array!(Vector);
coord_array!(Functional);

impl Functional {
    /// `f(x) = sum_i f_i x_i` (bilinear, no conjugation).
    #[inline]
    pub fn eval(&self, x: &Vector) -> C64 {
        dot(&self.0, &x.0)
    }
}

#[inline]
pub(crate) fn dot(f: &[C64], x: &[C64]) -> C64 {
    f.iter().zip(x).map(|(a, b)| a * b).sum()
}

/// Unit complex number with the argument of `z`; `1` at zero.
#[inline]
pub(crate) fn phase(z: C64) -> C64 {
    let r = z.norm();
    if r == 0.0 {
        C64::new(1.0, 0.0)
    } else {
        z / r
    }
}

/// A point of `Pi(X)`: unit vector, unit functional, `x*(x) = 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct State {
    x: Vector,
    xstar: Functional,
}

impl State {
    /// Validates the state invariants within [`STATE_TOL`].
    pub fn new(space: &SpaceDescriptor, x: Vector, xstar: Functional) -> Result<State> {
        space.check_dim(x.dim())?;
        space.check_dim(xstar.dim())?;
        let s = State { x, xstar };
        let d = s.defect(space);
        if d > STATE_TOL {
            return Err(Error::InvalidArgument(format!(
                "pair is not a state: invariant defect {d:e}"
            )));
        }
        Ok(s)
    }

    pub(crate) fn from_parts(x: Vector, xstar: Functional) -> State {
        State { x, xstar }
    }

    pub fn x(&self) -> &Vector {
        &self.x
    }

    pub fn xstar(&self) -> &Functional {
        &self.xstar
    }

    pub fn into_parts(self) -> (Vector, Functional) {
        (self.x, self.xstar)
    }

    /// Largest violation among `| |x| - 1 |`, `| |x*| - 1 |`, `|x*(x) - 1|`.
    pub fn defect(&self, space: &SpaceDescriptor) -> f64 {
        let nx = (space.norm_of(self.x.coords()) - 1.0).abs();
        let nf = (space.dual_norm_of(self.xstar.coords()) - 1.0).abs();
        let pairing = (self.xstar.eval(&self.x) - C64::new(1.0, 0.0)).norm();
        nx.max(nf).max(pairing)
    }

    /// Multiply both halves by conjugate unimodular factors; stays a state.
    pub fn rotated(&self, omega: C64) -> State {
        State { x: self.x.scaled(omega), xstar: self.xstar.scaled(omega.conj()) }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Extremum {
    Min,
    Max,
}

/// A free coordinate of an `l_1` duality face: `t` ranges over the interval
/// (real) or disk (complex) of the given radius.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FreeCoord {
    pub index: usize,
    pub radius: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub enum FaceKind {
    Singleton,
    Box { free: Vec<FreeCoord> },
    Simplex { extremes: Vec<Functional> },
}

/// The set `{x* : (x, x*) in Pi(X)}` for a fixed unit vector `x`.
#[derive(Clone, Debug, PartialEq)]
pub struct FaceDescriptor {
    base: Vector,
    field: Field,
    fixed: Functional,
    kind: FaceKind,
}

impl FaceDescriptor {
    pub fn base_point(&self) -> &Vector {
        &self.base
    }

    /// The fixed part: the unique element (singleton), the support part with
    /// zeros on free coordinates (box) or the barycenter (simplex).
    pub fn fixed_part(&self) -> &Functional {
        &self.fixed
    }

    pub fn kind(&self) -> &FaceKind {
        &self.kind
    }

    /// Canonical selection from the face.
    pub fn canonical(&self) -> Functional {
        self.fixed.clone()
    }

    /// Element of a box face with the free coordinates set to `t`.
    pub fn box_element(&self, t: &[C64]) -> Option<Functional> {
        let FaceKind::Box { free } = &self.kind else { return None };
        if t.len() != free.len() {
            return None;
        }
        let mut f = self.fixed.clone();
        for (fc, &ti) in free.iter().zip(t) {
            f.0[fc.index] = ti;
        }
        Some(f)
    }

    /// Convex combination of simplex extremes with the given weights.
    pub fn simplex_element(&self, weights: &[f64]) -> Option<Functional> {
        let FaceKind::Simplex { extremes } = &self.kind else { return None };
        if weights.len() != extremes.len() {
            return None;
        }
        let mut f = Functional::zeros(self.base.dim());
        for (e, &w) in extremes.iter().zip(weights) {
            for (fi, ei) in f.0.iter_mut().zip(&e.0) {
                *fi += ei * w;
            }
        }
        Some(f)
    }

    /// Random element, for brute-force checks of face membership.
    pub fn sample<R: Rng>(&self, rng: &mut R) -> Functional {
        match &self.kind {
            FaceKind::Singleton => self.fixed.clone(),
            FaceKind::Box { free } => {
                let t: Vec<C64> = free
                    .iter()
                    .map(|fc| {
                        let r = fc.radius * rng.gen::<f64>().sqrt();
                        match self.field {
                            Field::Real => C64::new(if rng.gen::<bool>() { r } else { -r }, 0.0),
                            Field::Complex => {
                                C64::from_polar(r, rng.gen::<f64>() * std::f64::consts::TAU)
                            }
                        }
                    })
                    .collect();
                self.box_element(&t).expect("box face")
            }
            FaceKind::Simplex { extremes } => {
                let mut w: Vec<f64> =
                    extremes.iter().map(|_| -rng.gen::<f64>().max(1e-300).ln()).collect();
                let s: f64 = w.iter().sum();
                w.iter_mut().for_each(|wi| *wi /= s);
                self.simplex_element(&w).expect("simplex face")
            }
        }
    }
}

/// `|v|` in the given space.
pub fn norm(space: &SpaceDescriptor, v: &Vector) -> Result<f64> {
    space.check_dim(v.dim())?;
    Ok(space.norm_of(v.coords()))
}

/// `|f|` in the dual space.
pub fn dual_norm(space: &SpaceDescriptor, f: &Functional) -> Result<f64> {
    space.check_dim(f.dim())?;
    Ok(space.dual_norm_of(f.coords()))
}

pub fn dual_space(space: &SpaceDescriptor) -> SpaceDescriptor {
    space.dual()
}

/// The duality face of a unit vector.
pub fn duality_face(space: &SpaceDescriptor, x: &Vector) -> Result<FaceDescriptor> {
    space.check_dim(x.dim())?;
    let nx = space.norm_of(x.coords());
    if (nx - 1.0).abs() > STATE_TOL {
        return Err(Error::NotOnSphere { norm: nx });
    }
    let n = space.dim();
    let u = x.coords();
    let (fixed, kind) = match space.exponent() {
        Exponent::Finite(p) if p == 1.0 => {
            let mut f = Functional::zeros(n);
            let mut free = Vec::new();
            for i in 0..n {
                let w = space.weight(i);
                if w * u[i].norm() <= ACTIVE_TOL {
                    free.push(FreeCoord { index: i, radius: w });
                } else {
                    f.0[i] = phase(u[i]).conj() * w;
                }
            }
            (f, if free.is_empty() { FaceKind::Singleton } else { FaceKind::Box { free } })
        }
        Exponent::Infinity => {
            let extremes: Vec<Functional> = active_set(space, u)
                .map(|i| {
                    let mut e = Functional::zeros(n);
                    e.0[i] = phase(u[i]).conj() * space.weight(i);
                    e
                })
                .collect();
            let k = extremes.len() as f64;
            let mut bary = Functional::zeros(n);
            for e in &extremes {
                for (b, c) in bary.0.iter_mut().zip(&e.0) {
                    *b += c / k;
                }
            }
            if extremes.len() == 1 {
                (bary, FaceKind::Singleton)
            } else {
                (bary, FaceKind::Simplex { extremes })
            }
        }
        Exponent::Finite(p) => {
            let mut g = Functional::zeros(n);
            smooth_support(space, p, u, &mut g.0);
            (g, FaceKind::Singleton)
        }
    };
    Ok(FaceDescriptor { base: x.clone(), field: space.field(), fixed, kind })
}

/// Indices with `w_i |u_i|` tied to the maximum (within [`ACTIVE_TOL`]).
pub(crate) fn active_set<'a>(
    space: &'a SpaceDescriptor,
    u: &'a [C64],
) -> impl Iterator<Item = usize> + 'a {
    let m = (0..u.len()).map(|i| space.weight(i) * u[i].norm()).fold(0.0, f64::max);
    (0..u.len()).filter(move |&i| space.weight(i) * u[i].norm() >= m * (1.0 - ACTIVE_TOL))
}

/// Support functional of `u` for `1 < p < inf`, normalized so that `g(u) = 1`.
#[inline]
pub(crate) fn smooth_support(space: &SpaceDescriptor, p: f64, u: &[C64], out: &mut [C64]) {
    let mut s = 0.0;
    for i in 0..u.len() {
        let w = space.weight(i);
        let a = w * u[i].norm();
        let mag = if p == 2.0 { a } else { a.powf(p - 1.0) };
        out[i] = phase(u[i]).conj() * (w * mag);
        s += mag * a;
    }
    if s > 0.0 {
        for o in out.iter_mut() {
            *o /= s;
        }
    }
}

/// Extremum of `|x*(y)|` over a duality face, with an attaining element.
pub fn face_extremize_abs(
    face: &FaceDescriptor,
    y: &Vector,
    mode: Extremum,
) -> Result<(f64, Functional)> {
    let n = face.base.dim();
    if y.dim() != n {
        return Err(Error::DimensionMismatch { expected: n, found: y.dim() });
    }
    match &face.kind {
        FaceKind::Singleton => Ok((face.fixed.eval(y).norm(), face.fixed.clone())),
        FaceKind::Box { free } => {
            let f = face.fixed.eval(y);
            let reach: f64 = free.iter().map(|fc| fc.radius * y.0[fc.index].norm()).sum();
            let t: Vec<C64> = match mode {
                Extremum::Min if f.norm() <= reach => {
                    // hit zero exactly: every free term contributes its share of -f
                    free.iter()
                        .map(|fc| -f / reach * fc.radius * phase(y.0[fc.index]).conj())
                        .collect()
                }
                Extremum::Min => free
                    .iter()
                    .map(|fc| -phase(f) * fc.radius * phase(y.0[fc.index]).conj())
                    .collect(),
                Extremum::Max => free
                    .iter()
                    .map(|fc| phase(f) * fc.radius * phase(y.0[fc.index]).conj())
                    .collect(),
            };
            let t: Vec<C64> = t
                .into_iter()
                .zip(free)
                .map(|(ti, fc)| if y.0[fc.index].norm() == 0.0 { C64::new(0.0, 0.0) } else { ti })
                .collect();
            let value = match mode {
                Extremum::Min => (f.norm() - reach).max(0.0),
                Extremum::Max => f.norm() + reach,
            };
            Ok((value, face.box_element(&t).expect("box face")))
        }
        FaceKind::Simplex { extremes } => {
            let z: Vec<C64> = extremes.iter().map(|e| e.eval(y)).collect();
            match mode {
                Extremum::Max => {
                    let (best, _) = z.iter().enumerate().fold((0, -1.0), |(bi, bv), (i, zi)| {
                        if zi.norm() > bv {
                            (i, zi.norm())
                        } else {
                            (bi, bv)
                        }
                    });
                    Ok((z[best].norm(), extremes[best].clone()))
                }
                Extremum::Min => {
                    let (value, weights) = min_norm_hull_2d(&z);
                    Ok((value, face.simplex_element(&weights).expect("simplex face")))
                }
            }
        }
    }
}

/// Distance from the origin to the convex hull of planar points, with the
/// convex weights of a nearest point.
pub(crate) fn min_norm_hull_2d(z: &[C64]) -> (f64, Vec<f64>) {
    let k = z.len();
    let mut best = (f64::INFINITY, vec![0.0; k]);
    let consider = |value: f64, weights: Vec<f64>, best: &mut (f64, Vec<f64>)| {
        if value < best.0 {
            *best = (value, weights);
        }
    };
    for i in 0..k {
        let mut w = vec![0.0; k];
        w[i] = 1.0;
        consider(z[i].norm(), w, &mut best);
    }
    for i in 0..k {
        for j in i + 1..k {
            let d = z[j] - z[i];
            let dd = d.norm_sqr();
            if dd == 0.0 {
                continue;
            }
            let t = -(z[i].conj() * d).re / dd;
            if t > 0.0 && t < 1.0 {
                let mut w = vec![0.0; k];
                w[i] = 1.0 - t;
                w[j] = t;
                consider((z[i] + d * t).norm(), w, &mut best);
            }
        }
    }
    if best.0 > 0.0 {
        for i in 0..k {
            for j in i + 1..k {
                for l in j + 1..k {
                    if let Some(bc) = barycentric_origin(z[i], z[j], z[l]) {
                        let mut w = vec![0.0; k];
                        w[i] = bc[0];
                        w[j] = bc[1];
                        w[l] = bc[2];
                        consider(0.0, w, &mut best);
                    }
                }
            }
        }
    }
    best
}

/// Barycentric coordinates of the origin in a nondegenerate triangle, if inside.
pub(crate) fn barycentric_origin(a: C64, b: C64, c: C64) -> Option<[f64; 3]> {
    let cross = |u: C64, v: C64| u.re * v.im - u.im * v.re;
    let area = cross(b - a, c - a);
    if area.abs() < 1e-300 {
        return None;
    }
    let wa = cross(b, c) / area;
    let wb = cross(c, a) / area;
    let wc = cross(a, b) / area;
    if wa >= 0.0 && wb >= 0.0 && wc >= 0.0 {
        Some([wa, wb, wc])
    } else {
        None
    }
}

/// Allocation-free `min`/`max |x*(y)|` over the face at the unit vector `u`.
/// Agrees with [`face_extremize_abs`] on [`duality_face`].
pub(crate) fn inner_extremum(space: &SpaceDescriptor, u: &[C64], y: &[C64], mode: Extremum) -> f64 {
    match space.exponent() {
        Exponent::Finite(p) if p == 1.0 => {
            let mut f = C64::new(0.0, 0.0);
            let mut reach = 0.0;
            for i in 0..u.len() {
                let w = space.weight(i);
                if w * u[i].norm() <= ACTIVE_TOL {
                    reach += w * y[i].norm();
                } else {
                    f += phase(u[i]).conj() * w * y[i];
                }
            }
            match mode {
                Extremum::Min => (f.norm() - reach).max(0.0),
                Extremum::Max => f.norm() + reach,
            }
        }
        Exponent::Infinity => {
            let mut pts = [C64::new(0.0, 0.0); 8];
            let mut count = 0;
            let mut overflow = Vec::new();
            for i in active_set(space, u) {
                let zi = phase(u[i]).conj() * space.weight(i) * y[i];
                if count < pts.len() {
                    pts[count] = zi;
                } else {
                    overflow.push(zi);
                }
                count += 1;
            }
            match mode {
                Extremum::Max => pts[..count.min(8)]
                    .iter()
                    .chain(&overflow)
                    .map(|z| z.norm())
                    .fold(0.0, f64::max),
                Extremum::Min => match count {
                    1 => pts[0].norm(),
                    2 => segment_distance(pts[0], pts[1]),
                    _ => {
                        let all: Vec<C64> = pts[..count.min(8)].iter().chain(&overflow).copied().collect();
                        min_norm_hull_2d(&all).0
                    }
                },
            }
        }
        Exponent::Finite(p) => {
            let mut num = C64::new(0.0, 0.0);
            let mut s = 0.0;
            for i in 0..u.len() {
                let w = space.weight(i);
                let a = w * u[i].norm();
                let mag = if p == 2.0 { a } else { a.powf(p - 1.0) };
                num += phase(u[i]).conj() * (w * mag) * y[i];
                s += mag * a;
            }
            num.norm() / s
        }
    }
}

pub(crate) fn segment_distance(a: C64, b: C64) -> f64 {
    let d = b - a;
    let dd = d.norm_sqr();
    if dd == 0.0 {
        return a.norm();
    }
    let t = (-(a.conj() * d).re / dd).clamp(0.0, 1.0);
    (a + d * t).norm()
}

/// A lower bound for the modulus of convexity `delta_X(eps)`, exact for
/// `p >= 2` (Clarkson) and `(p - 1) eps^2 / 8` for `1 < p < 2`.
pub fn modulus_of_convexity(space: &SpaceDescriptor, eps: f64) -> Result<f64> {
    if !(eps > 0.0 && eps <= 2.0) {
        return Err(Error::InvalidArgument(format!("eps must lie in (0, 2], got {eps}")));
    }
    match space.exponent() {
        Exponent::Finite(p) if p > 1.0 => {
            if p == 2.0 {
                let a = eps * eps / 4.0;
                // 1 - sqrt(1 - a) without cancellation
                Ok(a / (1.0 + (1.0 - a).sqrt()))
            } else if p > 2.0 {
                let a = (eps / 2.0).powf(p);
                Ok(-((-a).ln_1p() / p).exp_m1())
            } else {
                Ok((p - 1.0) * eps * eps / 8.0)
            }
        }
        p => Err(Error::NotUniformlyConvex { p: p.to_string() }),
    }
}

/// `count` unit vectors: the coordinate directions `+e_1, -e_1, +e_2, ...`
/// first, then seeded random directions.
pub fn sample_sphere(space: &SpaceDescriptor, seed: u64, count: usize) -> Vec<Vector> {
    let n = space.dim();
    let mut out = Vec::with_capacity(count);
    'coords: for i in 0..n {
        for sign in [1.0, -1.0] {
            if out.len() == count {
                break 'coords;
            }
            let mut v = Vector::zeros(n);
            v.0[i] = C64::new(sign / space.weight(i), 0.0);
            out.push(v);
        }
    }
    let mut rng = seeded(seed);
    while out.len() < count {
        let v = random_direction(space, &mut rng);
        out.push(v);
    }
    out
}

pub(crate) fn random_direction<R: Rng>(space: &SpaceDescriptor, rng: &mut R) -> Vector {
    loop {
        let coords: Vec<C64> = (0..space.dim())
            .map(|_| match space.field() {
                Field::Real => C64::new(rng.gen_range(-1.0..1.0), 0.0),
                Field::Complex => C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
            })
            .collect();
        let nrm = space.norm_of(&coords);
        if nrm > 1e-3 {
            return Vector(coords.into_iter().map(|c| c / nrm).collect());
        }
    }
}

/// `(x / |x|, canonical element of the duality face)`.
pub fn make_state(space: &SpaceDescriptor, x: &Vector) -> Result<State> {
    space.check_dim(x.dim())?;
    let nx = space.norm_of(x.coords());
    if nx == 0.0 || !nx.is_finite() {
        return Err(Error::ZeroVector);
    }
    let u = x.scaled(C64::new(1.0 / nx, 0.0));
    let face = duality_face(space, &u)?;
    Ok(State::from_parts(u, face.canonical()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn norm_examples() {
        let l1 = SpaceDescriptor::lp(2, Field::Real, 1.0).unwrap();
        let linf = SpaceDescriptor::lp(2, Field::Real, f64::INFINITY).unwrap();
        let w2 = SpaceDescriptor::weighted_lp(2, Field::Real, 2.0, vec![1.0, 2.0]).unwrap();
        let v = Vector::from_real(&[1.0, -2.0]);
        assert_eq!(norm(&l1, &v).unwrap(), 3.0);
        assert_eq!(norm(&linf, &v).unwrap(), 2.0);
        let ones = Vector::from_real(&[1.0, 1.0]);
        assert!((norm(&w2, &ones).unwrap() - 5f64.sqrt()).abs() < 1e-15);
        assert!(matches!(
            norm(&l1, &Vector::zeros(3)),
            Err(Error::DimensionMismatch { expected: 2, found: 3 })
        ));
    }

    #[test]
    fn invalid_descriptors() {
        assert!(SpaceDescriptor::lp(0, Field::Real, 2.0).is_err());
        assert!(SpaceDescriptor::lp(2, Field::Real, 0.5).is_err());
        assert!(SpaceDescriptor::weighted_lp(2, Field::Real, 2.0, vec![1.0, 0.0]).is_err());
        assert!(SpaceDescriptor::weighted_lp(2, Field::Real, 2.0, vec![1.0]).is_err());
    }

    #[test]
    fn dual_space_examples() {
        let l1 = SpaceDescriptor::lp(2, Field::Real, 1.0).unwrap();
        assert!(dual_space(&l1).exponent().is_infinite());
        let l2 = SpaceDescriptor::lp(2, Field::Real, 2.0).unwrap();
        assert_eq!(dual_space(&l2), l2);
        let l3 = SpaceDescriptor::lp(2, Field::Real, 3.0).unwrap();
        assert_eq!(dual_space(&l3).exponent(), Exponent::Finite(1.5));
        let w = SpaceDescriptor::weighted_lp(3, Field::Complex, 1.7, vec![0.5, 2.0, 3.0]).unwrap();
        assert!(dual_space(&dual_space(&w)).approx_eq(&w));
        assert_eq!(dual_space(&w).weight(0), 2.0);
    }

    #[test]
    fn face_l2_is_self_dual() {
        let l2 = SpaceDescriptor::lp(2, Field::Real, 2.0).unwrap();
        let face = duality_face(&l2, &Vector::from_real(&[0.6, 0.8])).unwrap();
        assert_eq!(face.kind(), &FaceKind::Singleton);
        assert!(face.fixed_part().max_abs_diff(&Functional::from_real(&[0.6, 0.8])) < 1e-15);
    }

    #[test]
    fn face_l1_box_brute_check() {
        let l1 = SpaceDescriptor::lp(2, Field::Real, 1.0).unwrap();
        let x = Vector::from_real(&[1.0, 0.0]);
        let face = duality_face(&l1, &x).unwrap();
        assert_eq!(face.fixed_part(), &Functional::from_real(&[1.0, 0.0]));
        assert_eq!(face.kind(), &FaceKind::Box { free: vec![FreeCoord { index: 1, radius: 1.0 }] });
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..500 {
            let f = face.sample(&mut rng);
            assert!((dual_norm(&l1, &f).unwrap() - 1.0).abs() < 1e-10);
            assert!((f.eval(&x) - c(1.0)).norm() < 1e-10);
        }
    }

    #[test]
    fn face_linf_simplex_brute_check() {
        let linf = SpaceDescriptor::lp(2, Field::Real, f64::INFINITY).unwrap();
        let x = Vector::from_real(&[1.0, 1.0]);
        let face = duality_face(&linf, &x).unwrap();
        let FaceKind::Simplex { extremes } = face.kind() else { panic!("expected simplex") };
        assert_eq!(
            extremes,
            &vec![Functional::from_real(&[1.0, 0.0]), Functional::from_real(&[0.0, 1.0])]
        );
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
        for _ in 0..500 {
            let f = face.sample(&mut rng);
            assert!((dual_norm(&linf, &f).unwrap() - 1.0).abs() < 1e-10);
            assert!((f.eval(&x) - c(1.0)).norm() < 1e-10);
        }
    }

    #[test]
    fn face_requires_unit_vector() {
        let l2 = SpaceDescriptor::lp(2, Field::Real, 2.0).unwrap();
        assert!(matches!(
            duality_face(&l2, &Vector::from_real(&[1.0, 1.0])),
            Err(Error::NotOnSphere { .. })
        ));
    }

    #[test]
    fn box_extremization_examples() {
        let l1 = SpaceDescriptor::lp(2, Field::Real, 1.0).unwrap();
        let face = duality_face(&l1, &Vector::from_real(&[1.0, 0.0])).unwrap();
        let (v, w) = face_extremize_abs(&face, &Vector::from_real(&[0.5, 1.0]), Extremum::Min).unwrap();
        assert!(v.abs() < 1e-15);
        assert!((w.coords()[1] - c(-0.5)).norm() < 1e-15);
        let (v, w) = face_extremize_abs(&face, &Vector::from_real(&[2.0, 0.5]), Extremum::Min).unwrap();
        assert!((v - 1.5).abs() < 1e-15);
        assert!((w.coords()[1] - c(-1.0)).norm() < 1e-15);
    }

    #[test]
    fn singleton_extremization_has_no_freedom() {
        let l3 = SpaceDescriptor::lp(2, Field::Complex, 3.0).unwrap();
        let s = make_state(&l3, &Vector::new(vec![C64::new(0.3, 0.4), c(-1.0)])).unwrap();
        let face = duality_face(&l3, s.x()).unwrap();
        let y = Vector::new(vec![C64::new(1.0, 2.0), C64::new(-0.5, 0.1)]);
        for mode in [Extremum::Min, Extremum::Max] {
            let (v, w) = face_extremize_abs(&face, &y, mode).unwrap();
            assert_eq!(&w, s.xstar());
            assert!((v - s.xstar().eval(&y).norm()).abs() < 1e-15);
        }
    }

    #[test]
    fn modulus_examples() {
        let l2 = SpaceDescriptor::lp(2, Field::Real, 2.0).unwrap();
        assert!((modulus_of_convexity(&l2, 2.0).unwrap() - 1.0).abs() < 1e-15);
        let v = modulus_of_convexity(&l2, 2f64.sqrt()).unwrap();
        assert!((v - (1.0 - 2f64.sqrt() / 2.0)).abs() < 1e-15);
        let l1 = SpaceDescriptor::lp(2, Field::Real, 1.0).unwrap();
        assert!(matches!(modulus_of_convexity(&l1, 1.0), Err(Error::NotUniformlyConvex { .. })));
        let linf = SpaceDescriptor::lp(2, Field::Real, f64::INFINITY).unwrap();
        assert!(matches!(modulus_of_convexity(&linf, 1.0), Err(Error::NotUniformlyConvex { .. })));
        assert!(modulus_of_convexity(&l2, 0.0).is_err());
        // tiny arguments keep their precision
        let l3 = SpaceDescriptor::lp(2, Field::Real, 3.0).unwrap();
        let tiny = modulus_of_convexity(&l3, 1e-6).unwrap();
        assert!((tiny / ((0.5e-6f64).powi(3) / 3.0) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn sample_sphere_contract() {
        let s = SpaceDescriptor::lp(2, Field::Real, 3.0).unwrap();
        let batch = sample_sphere(&s, 9, 5);
        assert_eq!(batch.len(), 5);
        assert_eq!(batch[0], Vector::from_real(&[1.0, 0.0]));
        assert_eq!(batch[1], Vector::from_real(&[-1.0, 0.0]));
        assert_eq!(batch[2], Vector::from_real(&[0.0, 1.0]));
        assert_eq!(batch[3], Vector::from_real(&[0.0, -1.0]));
        assert_eq!(batch, sample_sphere(&s, 9, 5));
        let w = SpaceDescriptor::weighted_lp(3, Field::Complex, 1.5, vec![2.0, 0.5, 1.0]).unwrap();
        for v in sample_sphere(&w, 1, 50) {
            assert!((norm(&w, &v).unwrap() - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn make_state_examples() {
        let l2 = SpaceDescriptor::lp(2, Field::Real, 2.0).unwrap();
        let s = make_state(&l2, &Vector::from_real(&[2.0, 0.0])).unwrap();
        assert_eq!(s.x(), &Vector::from_real(&[1.0, 0.0]));
        assert_eq!(s.xstar(), &Functional::from_real(&[1.0, 0.0]));

        let l1 = SpaceDescriptor::lp(2, Field::Real, 1.0).unwrap();
        let s = make_state(&l1, &Vector::from_real(&[1.0, 0.0])).unwrap();
        assert_eq!(s.xstar(), &Functional::from_real(&[1.0, 0.0]));
        assert!(s.defect(&l1) <= STATE_TOL);

        let linf = SpaceDescriptor::lp(2, Field::Real, f64::INFINITY).unwrap();
        let s = make_state(&linf, &Vector::from_real(&[1.0, 1.0])).unwrap();
        assert_eq!(s.xstar(), &Functional::from_real(&[0.5, 0.5]));
        assert!(s.defect(&linf) <= STATE_TOL);

        assert_eq!(make_state(&l2, &Vector::zeros(2)), Err(Error::ZeroVector));
    }

    #[test]
    fn inner_extremum_matches_face_descriptor() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for p in [1.0, 1.5, 2.0, 3.0, f64::INFINITY] {
            for field in [Field::Real, Field::Complex] {
                let s = SpaceDescriptor::weighted_lp(3, field, p, vec![1.0, 0.5, 2.0]).unwrap();
                for u in sample_sphere(&s, 5, 40) {
                    let y = random_direction(&s, &mut rng);
                    let face = duality_face(&s, &u).unwrap();
                    for mode in [Extremum::Min, Extremum::Max] {
                        let (v, w) = face_extremize_abs(&face, &y, mode).unwrap();
                        let fast = inner_extremum(&s, u.coords(), y.coords(), mode);
                        assert!((v - fast).abs() < 1e-12, "p={p} {mode:?}: {v} vs {fast}");
                        assert!((w.eval(&y).norm() - v).abs() < 1e-12);
                        assert!(State::new(&s, u.clone(), w).is_ok());
                    }
                }
            }
        }
    }

    #[test]
    fn hull_distance_cases() {
        let (d, _) = min_norm_hull_2d(&[c(-1.0), c(2.0)]);
        assert_eq!(d, 0.0);
        let (d, w) = min_norm_hull_2d(&[
            C64::new(1.0, 1.0),
            C64::new(-1.0, 1.0),
            C64::new(0.0, -1.0),
        ]);
        assert_eq!(d, 0.0);
        assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        let (d, _) = min_norm_hull_2d(&[C64::new(1.0, 1.0), C64::new(1.0, -1.0)]);
        assert!((d - 1.0).abs() < 1e-15);
    }
}
