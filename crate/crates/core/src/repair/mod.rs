//! Perturbations that turn an operator into one attaining its Crawford
//! number: a scalar shift when `c(T)` is small, a rank-one correction through
//! a near-kernel vector, and the general exposing construction driven by a
//! small random functional.

mod polytope;

use std::fmt;

use num_complex::Complex64 as C64;

use crate::crawford::{
    compute_with, default_tol, objective, ComputeResult, EngineOptions, Method, Quantity, Strategy,
};
use crate::error::{Error, Result};
use crate::oper::{apply, rank_one_norm, rank_one_update, Operator};
use crate::rng::seeded;
use crate::search::{grid_max_dim, grid_polished, multistart};
use crate::space::{
    dot, duality_face, face_extremize_abs, phase, random_direction, Extremum, Functional, State,
    Vector,
};

pub use polytope::{min_attain_polytope, min_norm_point, PolytopeCase, PolytopeOutcome};

/// Default slack for verifying that a certificate attains `c(S)`.
pub const REPAIR_TOL: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RepairKind {
    Zero,
    CompactStyle,
    Exposing,
}

impl RepairKind {
    pub fn as_str(self) -> &'static str {
        match self {
            RepairKind::Zero => "zero",
            RepairKind::CompactStyle => "compact_style",
            RepairKind::Exposing => "exposing",
        }
    }
}

impl fmt::Display for RepairKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RepairOutcome {
    pub s: Operator,
    pub certificate: State,
    /// `|S - T|`.
    pub distance: f64,
    pub kind: RepairKind,
    /// The exposing functional `z*`, for the exposing construction.
    pub zstar: Option<Functional>,
}

impl RepairOutcome {
    /// `|x0*(S x0)|` at the certificate.
    pub fn certificate_value(&self) -> f64 {
        let y = apply(&self.s, self.certificate.x()).expect("certificate matches S");
        self.certificate.xstar().eval(&y).norm()
    }
}

#[derive(Clone, Debug)]
pub struct RepairConfig {
    pub max_retries: usize,
    pub repair_tol: f64,
    /// `|z*|` as a fraction of `min(eps, c(T))`; must lie in `(0, 1)`.
    pub zstar_fraction: f64,
    pub engine: EngineOptions,
}

impl Default for RepairConfig {
    fn default() -> Self {
        RepairConfig { max_retries: 8, repair_tol: REPAIR_TOL, zstar_fraction: 0.5, engine: EngineOptions::default() }
    }
}

fn check_eps(eps: f64) -> Result<()> {
    if eps > 0.0 && eps.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("eps must be positive, got {eps}")))
    }
}

fn crawford(t: &Operator, engine: &EngineOptions) -> Result<ComputeResult> {
    compute_with(t, Quantity::Crawford, Strategy::Auto, default_tol(t, Strategy::Auto), engine)
}

/// `S = T - x0*(T x0) I` at a state with `|x0*(T x0)| < eps`.
pub fn zero_crawford_repair(t: &Operator, eps: f64) -> Result<RepairOutcome> {
    check_eps(eps)?;
    let c = crawford(t, &EngineOptions::default())?;
    zero_from(t, eps, c)
}

fn zero_from(t: &Operator, eps: f64, c: ComputeResult) -> Result<RepairOutcome> {
    let (x0, x0s) = c.certificate.into_parts();
    let a = x0s.eval(&apply(t, &x0)?);
    if !(c.value < eps && a.norm() < eps) {
        return Err(Error::PreconditionFailed(format!(
            "c(T) = {} is not below eps = {eps}",
            c.value.max(a.norm())
        )));
    }
    let n = t.dim();
    let mut m = t.matrix().clone();
    for i in 0..n {
        m[(i, i)] -= a;
    }
    let s = Operator::new(t.space().clone(), m)?;
    Ok(RepairOutcome {
        s,
        certificate: State::from_parts(x0, x0s),
        distance: a.norm(),
        kind: RepairKind::Zero,
        zstar: None,
    })
}

/// `S = T - x0*(.) T x0` at a unit `x0` with `|T x0| < eps`.
pub fn compact_style_repair(t: &Operator, eps: f64) -> Result<RepairOutcome> {
    check_eps(eps)?;
    let m = compute_with(t, Quantity::MinNorm, Strategy::Auto, default_tol(t, Strategy::Auto), &EngineOptions::default())?;
    if m.value >= eps {
        return Err(Error::PreconditionFailed(format!("m(T) = {} is not below eps = {eps}", m.value)));
    }
    if m.method == Method::Kernel {
        return Ok(RepairOutcome {
            s: t.clone(),
            certificate: m.certificate,
            distance: 0.0,
            kind: RepairKind::CompactStyle,
            zstar: None,
        });
    }
    let (x0, x0s) = m.certificate.into_parts();
    let y = apply(t, &x0)?;
    let s = rank_one_update(t, &x0s, &y, C64::new(-1.0, 0.0))?;
    let distance = rank_one_norm(t.space(), &x0s, &y)?;
    if distance >= eps {
        return Err(Error::PreconditionFailed(format!("|T x0| = {distance} is not below eps = {eps}")));
    }
    Ok(RepairOutcome {
        s,
        certificate: State::from_parts(x0, x0s),
        distance,
        kind: RepairKind::CompactStyle,
        zstar: None,
    })
}

/// `S = T - lambda z*(.) x0` where `x0` maximizes `-phi_T + |z*|` on the sphere.
pub fn exposing_repair(t: &Operator, eps: f64, seed: u64) -> Result<RepairOutcome> {
    exposing_repair_with(t, eps, seed, &RepairConfig::default())
}

pub fn exposing_repair_with(t: &Operator, eps: f64, seed: u64, cfg: &RepairConfig) -> Result<RepairOutcome> {
    check_eps(eps)?;
    let c = crawford(t, &cfg.engine)?;
    exposing_from(t, eps, seed, cfg, &c)
}

fn exposing_from(t: &Operator, eps: f64, seed: u64, cfg: &RepairConfig, c: &ComputeResult) -> Result<RepairOutcome> {
    if !(cfg.zstar_fraction > 0.0 && cfg.zstar_fraction < 1.0) {
        return Err(Error::InvalidArgument("zstar_fraction must lie in (0, 1)".into()));
    }
    if c.value <= 0.0 {
        return Err(Error::PreconditionFailed("c(T) = 0; use the zero repair".into()));
    }
    let space = t.space();
    let dual = space.dual();
    let radius = cfg.zstar_fraction * eps.min(c.value);
    let base = objective(t, Quantity::Crawford);

    for attempt in 0..cfg.max_retries.max(1) {
        let attempt_seed = seed.wrapping_add(attempt as u64);
        let mut rng = seeded(attempt_seed);
        let dir = random_direction(&dual, &mut rng);
        let z = Functional::new(dir.into_coords().into_iter().map(|v| v * radius).collect());

        let zc = z.coords().to_vec();
        let obj = |u: &[C64]| base(u) - dot(&zc, u).norm();
        let mut search = cfg.engine.search.clone();
        search.seed = attempt_seed;
        let warm = vec![c.certificate.x().coords().to_vec()];
        let mut best = multistart(space, &obj, &warm, &search);
        if space.dim() <= grid_max_dim(space.field()) {
            let g = grid_polished(space, &obj, search.grid_resolution, search.min_step)?;
            if g.value < best.value {
                best = g;
            }
        }

        let x0 = Vector::new(best.point);
        let omega = phase(z.eval(&x0)).conj();
        let z = z.scaled(omega);
        let face = duality_face(space, &x0)?;
        let (_, x0s) = face_extremize_abs(&face, &apply(t, &x0)?, Extremum::Min)?;
        let a = x0s.eval(&apply(t, &x0)?);
        let lambda = if a.norm() == 0.0 { C64::new(1.0, 0.0) } else { phase(a) };
        let s = rank_one_update(t, &z, &x0, -lambda)?;
        let distance = rank_one_norm(space, &z, &x0)?;

        let cs = crawford(&s, &cfg.engine)?;
        let certificate = State::from_parts(x0, x0s);
        let out = RepairOutcome { s, certificate, distance, kind: RepairKind::Exposing, zstar: Some(z) };
        if distance < eps && out.certificate_value() <= cs.value + cfg.repair_tol {
            return Ok(out);
        }
    }
    Err(Error::AttainmentUnverified { retries: cfg.max_retries.max(1) })
}

/// Zero repair when `c(T) < eps / 2`, exposing repair otherwise.
pub fn repair_dispatch(t: &Operator, eps: f64, seed: u64) -> Result<RepairOutcome> {
    repair_dispatch_with(t, eps, seed, &RepairConfig::default())
}

pub fn repair_dispatch_with(t: &Operator, eps: f64, seed: u64, cfg: &RepairConfig) -> Result<RepairOutcome> {
    check_eps(eps)?;
    let c = crawford(t, &cfg.engine)?;
    if c.value < eps / 2.0 {
        zero_from(t, eps, c)
    } else {
        exposing_from(t, eps, seed, cfg, &c)
    }
}
