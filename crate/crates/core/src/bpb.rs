//! Simultaneous correction of an operator and a near-attaining state.
//!
//! Starting from `(T, x, x*)` with `|x*(Tx)|` close to `c(T)`, each step
//! pushes the current state down by a rank-one term of size
//! `e_n = eps^{n+1} / 4^{n+1}` and re-selects a minimizing state near the
//! previous one. The limit operator attains its Crawford number at the limit
//! state; the run stops once `e_n` falls below `step_tol`.

use num_complex::Complex64 as C64;

use crate::crawford::{compute_with, EngineOptions, Quantity, Strategy};
use crate::error::{Error, Result};
use crate::oper::{apply, rank_one_norm, rank_one_update, Operator};
use crate::space::{dual_space, modulus_of_convexity, phase, SpaceDescriptor, State, STATE_TOL};

#[derive(Clone, Debug)]
pub struct BpbConfig {
    /// In `(0, 4)`.
    pub eps: f64,
    pub max_iter: usize,
    /// Stop once `eps^{n+1} / 4^{n+1}` drops below this.
    pub step_tol: f64,
    /// Tolerance handed to the inner Crawford computations.
    pub inner_tol: f64,
    /// Allowance on the state-distance bounds for the positional error of
    /// numerically selected minimizers.
    pub inner_slack: f64,
    pub engine: EngineOptions,
}

impl BpbConfig {
    pub fn new(eps: f64) -> BpbConfig {
        BpbConfig {
            eps,
            max_iter: 200,
            step_tol: 1e-14,
            inner_tol: 1e-6,
            inner_slack: 1e-5,
            engine: EngineOptions::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BpbStep {
    pub n: usize,
    /// Unimodular factor of the update applied after this step.
    pub lambda: C64,
    /// `(x_n, x_n*)`.
    pub state: State,
    /// Computed `c(T_n)`.
    pub c_estimate: f64,
    /// `|T_{n+1} - T_n|` (zero on the final step).
    pub op_delta: f64,
    /// `|x_{n+1} - x_n|` (zero on the final step).
    pub state_delta_x: f64,
    /// `|x*_{n+1} - x*_n|` in the dual norm (zero on the final step).
    pub state_delta_xstar: f64,
    /// `eps^{n+1} / 4^{n+1}`.
    pub step_size: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BpbTrace {
    pub steps: Vec<BpbStep>,
    pub s: Operator,
    pub final_state: State,
    /// Sum of the per-step operator changes; bounds `|S - T|`.
    pub total_distance: f64,
    /// `|z*(Sz)| - c(S)` as computed.
    pub final_gap: f64,
    /// `sum_{k > last} eps^{k+1} / 4^{k+1}`.
    pub tail: f64,
    /// `|x*(Tx)| - c(T)` at the start state.
    pub start_gap: f64,
}

/// Bound on `|x_{n+1} - x_n|` (and the dual analogue) at step `n`.
/// Step 0 only gets `eps^2/16` when the start was `eta(eps/4)`-close to `c(T)`;
/// otherwise the start tolerance `eta(eps)` yields `eps/4`.
pub fn state_bound(space: &SpaceDescriptor, eps: f64, n: usize, start_gap: f64) -> f64 {
    let e = step_size(eps, n);
    if n == 0 {
        match eta(space, eps / 4.0) {
            Ok(h) if start_gap <= h => e / 4.0,
            _ => eps / 4.0,
        }
    } else {
        e / 4.0
    }
}

/// `(eps/4) min(delta_X(eps/4), delta_{X*}(eps/4))`.
pub fn eta(space: &SpaceDescriptor, eps: f64) -> Result<f64> {
    if !(eps > 0.0 && eps < 4.0) {
        return Err(Error::InvalidArgument(format!("eps must lie in (0, 4), got {eps}")));
    }
    let q = eps / 4.0;
    let dx = modulus_of_convexity(space, q)?;
    let dxs = modulus_of_convexity(&dual_space(space), q)?;
    Ok(q * dx.min(dxs))
}

/// `eps^{n+1} / 4^{n+1}`.
pub fn step_size(eps: f64, n: usize) -> f64 {
    (eps / 4.0).powi(n as i32 + 1)
}

fn select(t: &Operator, prev: &State, cfg: &BpbConfig) -> Result<(State, f64)> {
    let mut engine = cfg.engine.clone();
    engine.warm_starts.insert(0, prev.x().clone());
    let r = compute_with(t, Quantity::Crawford, Strategy::Auto, cfg.inner_tol, &engine)?;
    if !r.attained {
        return Err(Error::NonConvergent {
            step: 0,
            reason: format!("inner selection residual {:e} above tolerance", r.residual),
        });
    }
    let state = r.certificate;
    let align = phase(state.xstar().eval(prev.x()));
    Ok((state.rotated(align), r.value))
}

pub fn bpb_refine(t: &Operator, start: &State, cfg: &BpbConfig) -> Result<BpbTrace> {
    let space = t.space();
    if cfg.max_iter < 1 {
        return Err(Error::InvalidArgument("max_iter must be at least 1".into()));
    }
    if !(cfg.inner_tol > 0.0 && cfg.step_tol > 0.0 && cfg.inner_slack >= 0.0) {
        return Err(Error::InvalidArgument("tolerances must be positive".into()));
    }
    let eta_eps = eta(space, cfg.eps)?;
    space.check_dim(start.x().dim())?;
    if start.defect(space) > STATE_TOL {
        return Err(Error::PreconditionFailed("start pair is not a state".into()));
    }
    let c0 = compute_with(t, Quantity::Crawford, Strategy::Auto, cfg.inner_tol, &cfg.engine)?.value;
    let start_value = start.xstar().eval(&apply(t, start.x())?).norm();
    if !(start_value < c0 + eta_eps) {
        return Err(Error::PreconditionFailed(format!(
            "start value {start_value} is not within eta = {eta_eps:e} of c(T) = {c0}"
        )));
    }
    let start_gap = start_value - c0;

    let mut tn = t.clone();
    let mut state = start.clone();
    let mut c_n = c0;
    let mut steps: Vec<BpbStep> = Vec::new();
    let mut total = 0.0;
    let mut n = 0usize;
    loop {
        let e = step_size(cfg.eps, n);
        let a = state.xstar().eval(&apply(&tn, state.x())?);
        let lambda = -phase(a);
        if e < cfg.step_tol || n == cfg.max_iter {
            steps.push(BpbStep {
                n,
                lambda,
                state: state.clone(),
                c_estimate: c_n,
                op_delta: 0.0,
                state_delta_x: 0.0,
                state_delta_xstar: 0.0,
                step_size: e,
            });
            let r = cfg.eps / 4.0;
            let tail = e * r / (1.0 - r);
            let final_gap = a.norm() - c_n;
            let final_state = state;
            return Ok(BpbTrace { steps, s: tn, final_state, total_distance: total, final_gap, tail, start_gap });
        }
        let next_t = rank_one_update(&tn, state.xstar(), state.x(), lambda * e)?;
        let op_delta = rank_one_norm(space, state.xstar(), state.x())? * e;
        let (next_state, next_c) = select(&next_t, &state, cfg).map_err(|err| match err {
            Error::NonConvergent { reason, .. } => Error::NonConvergent { step: n + 1, reason },
            other => other,
        })?;
        let dx = space.norm_of(next_state.x().sub(state.x()).coords());
        let dxs = space.dual_norm_of(next_state.xstar().sub(state.xstar()).coords());

        let op_bound = e + 1e-12;
        let state_bound = state_bound(space, cfg.eps, n, start_gap) + cfg.inner_slack;
        if op_delta > op_bound || dx > state_bound || dxs > state_bound {
            return Err(Error::NonConvergent {
                step: n,
                reason: format!(
                    "step bound violated: |dT| = {op_delta:e}, |dx| = {dx:e}, |dx*| = {dxs:e}, bound {state_bound:e}"
                ),
            });
        }
        total += op_delta;
        steps.push(BpbStep {
            n,
            lambda,
            state,
            c_estimate: c_n,
            op_delta,
            state_delta_x: dx,
            state_delta_xstar: dxs,
            step_size: e,
        });
        tn = next_t;
        state = next_state;
        c_n = next_c;
        n += 1;
    }
}
