//! Crawford number, numerical radius and the norm-type extremal problems,
//! all returning a [`ComputeResult`] that carries the state witnessing the
//! value.
//!
//! Every quantity is an optimization over the unit sphere with an exact
//! inner extremization over the duality face (`c(T) = inf_x min_{x*} |x*(Tx)|`).
//! Hilbert spaces take an eigenvalue/SVD fast path; other norms use seeded
//! multi-start compass search, cross-checked by an exhaustive angular grid
//! when the dimension allows.

mod sweep;
mod witness;

use std::fmt;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::linalg::{normalize_phase, svd_right};
use crate::oper::{apply, Operator};
use crate::search::{grid_max_dim, grid_polished, multistart, Candidate, SearchConfig};
use crate::space::{
    duality_face, face_extremize_abs, inner_extremum, make_state, Exponent, Extremum, Field,
    State, Vector, STATE_TOL,
};

pub use sweep::{hilbert_sweep, BoundaryPoint, SweepOutcome};
pub use witness::{witness_check, WitnessReport};

/// Default tolerance for the eigenvalue / SVD fast paths.
pub const FAST_TOL: f64 = 1e-8;
/// Default tolerance for multi-start search.
pub const MULTISTART_TOL: f64 = 1e-6;

/// Singular values below this fraction of `max(1, sigma_max)` mark a kernel.
const KERNEL_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Strategy {
    Auto,
    HilbertSweep,
    Multistart,
    GridOracle,
}

impl std::str::FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Strategy> {
        match s {
            "auto" => Ok(Strategy::Auto),
            "hilbert_sweep" | "hilbertSweep" | "sweep" => Ok(Strategy::HilbertSweep),
            "multistart" => Ok(Strategy::Multistart),
            "grid_oracle" | "gridOracle" | "grid" => Ok(Strategy::GridOracle),
            other => Err(Error::Parse(format!("unknown strategy '{other}'"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Quantity {
    /// `c(T) = inf |x*(Tx)|` over states.
    Crawford,
    /// `nu(T) = sup |x*(Tx)|` over states.
    Radius,
    /// `m(T) = inf |Tx|` over unit vectors.
    MinNorm,
    /// `|T| = sup |Tx|` over unit vectors.
    OpNorm,
}

impl Quantity {
    pub fn extremum(self) -> Extremum {
        match self {
            Quantity::Crawford | Quantity::MinNorm => Extremum::Min,
            Quantity::Radius | Quantity::OpNorm => Extremum::Max,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Quantity::Crawford => "crawford",
            Quantity::Radius => "radius",
            Quantity::MinNorm => "minnorm",
            Quantity::OpNorm => "opnorm",
        }
    }
}

impl std::str::FromStr for Quantity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Quantity> {
        match s {
            "crawford" => Ok(Quantity::Crawford),
            "radius" => Ok(Quantity::Radius),
            "minnorm" => Ok(Quantity::MinNorm),
            "opnorm" => Ok(Quantity::OpNorm),
            other => Err(Error::Parse(format!("unknown quantity '{other}'"))),
        }
    }
}

/// How a result was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    HilbertSweep,
    Svd,
    Multistart,
    MultistartGrid,
    GridOracle,
    ColumnSum,
    RowSum,
    Diagonal,
    Kernel,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::HilbertSweep => "hilbert_sweep",
            Method::Svd => "svd",
            Method::Multistart => "multistart",
            Method::MultistartGrid => "multistart+grid",
            Method::GridOracle => "grid_oracle",
            Method::ColumnSum => "column_sum",
            Method::RowSum => "row_sum",
            Method::Diagonal => "diagonal",
            Method::Kernel => "kernel",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A computed extremal value with the state that witnesses it.
#[derive(Clone, Debug, PartialEq)]
pub struct ComputeResult {
    pub value: f64,
    pub certificate: State,
    /// `|x*(Tx)|` (or `|Tx|` for the norm quantities) at the certificate.
    pub witness_value: f64,
    pub method: Method,
    /// `|witness_value - value|`.
    pub residual: f64,
    /// `residual <= tol`.
    pub attained: bool,
}

/// Knobs beyond strategy and tolerance.
#[derive(Clone, Debug)]
pub struct EngineOptions {
    pub search: SearchConfig,
    /// Angular samples of the Hilbert-space sweep.
    pub sweep_samples: usize,
    /// Extra starting points for the multi-start search, tried first.
    pub warm_starts: Vec<Vector>,
    /// Cross-check multi-start with the grid oracle when the dimension allows.
    pub grid_check: bool,
}

impl Default for EngineOptions {
    fn default() -> Self {
        EngineOptions {
            search: SearchConfig::default(),
            sweep_samples: 720,
            warm_starts: Vec::new(),
            grid_check: true,
        }
    }
}

/// Default tolerance for a strategy on the operator's space.
pub fn default_tol(t: &Operator, strategy: Strategy) -> f64 {
    match strategy {
        Strategy::HilbertSweep => FAST_TOL,
        Strategy::Auto if t.space().is_hilbert() => FAST_TOL,
        _ => MULTISTART_TOL,
    }
}

pub fn crawford_number(t: &Operator, strategy: Strategy, tol: f64) -> Result<ComputeResult> {
    extremal(t, Quantity::Crawford, strategy, tol)
}

pub fn numerical_radius(t: &Operator, strategy: Strategy, tol: f64) -> Result<ComputeResult> {
    extremal(t, Quantity::Radius, strategy, tol)
}

pub(crate) fn extremal(t: &Operator, q: Quantity, strategy: Strategy, tol: f64) -> Result<ComputeResult> {
    compute_with(t, q, strategy, tol, &EngineOptions::default())
}

/// `phi_T(x) = (1/|x|) min { |x*(T x/|x|)| : x* in face(x/|x|) }`, `+inf` at 0.
pub fn phi(t: &Operator, x: &Vector) -> Result<f64> {
    let space = t.space();
    space.check_dim(x.dim())?;
    let nx = space.norm_of(x.coords());
    if nx > 1.0 + STATE_TOL {
        return Err(Error::OutsideBall { norm: nx });
    }
    if nx == 0.0 {
        return Ok(f64::INFINITY);
    }
    let u = x.scaled(C64::new(1.0 / nx, 0.0));
    let face = duality_face(space, &u)?;
    let y = apply(t, &u)?;
    let (v, _) = face_extremize_abs(&face, &y, Extremum::Min)?;
    Ok(v / nx)
}

/// Search objective: a signed square of the quantity's value, which keeps
/// the argmin and is smooth at isolated zeros where `|x*(Tx)|` has a cone.
fn search_objective(t: &Operator, q: Quantity) -> impl Fn(&[C64]) -> f64 + '_ {
    let f = objective(t, q);
    move |u: &[C64]| {
        let v = f(u);
        v * v.abs()
    }
}

/// Value at a unit vector of the sphere objective of `q` (signed for minimization).
pub(crate) fn objective(t: &Operator, q: Quantity) -> impl Fn(&[C64]) -> f64 + '_ {
    let space = t.space();
    let n = space.dim();
    move |u: &[C64]| {
        let mut stack = [C64::new(0.0, 0.0); 8];
        let mut heap;
        let y: &mut [C64] = if n <= stack.len() {
            &mut stack[..n]
        } else {
            heap = vec![C64::new(0.0, 0.0); n];
            &mut heap
        };
        t.apply_raw(u, y);
        match q {
            Quantity::Crawford => inner_extremum(space, u, y, Extremum::Min),
            Quantity::Radius => -inner_extremum(space, u, y, Extremum::Max),
            Quantity::MinNorm => space.norm_of(y),
            Quantity::OpNorm => -space.norm_of(y),
        }
    }
}

/// Certificate state and witness value at a unit vector.
pub(crate) fn certify(t: &Operator, q: Quantity, u: Vec<C64>) -> Result<(State, f64)> {
    let space = t.space();
    let mut u = Vector::new(u);
    let nu = space.norm_of(u.coords());
    if (nu - 1.0).abs() > 0.0 {
        u = u.scaled(C64::new(1.0 / nu, 0.0));
    }
    let y = apply(t, &u)?;
    match q {
        Quantity::Crawford | Quantity::Radius => {
            let face = duality_face(space, &u)?;
            let (w, xs) = face_extremize_abs(&face, &y, q.extremum())?;
            Ok((State::from_parts(u, xs), w))
        }
        Quantity::MinNorm | Quantity::OpNorm => {
            let s = make_state(space, &u)?;
            Ok((s, space.norm_of(y.coords())))
        }
    }
}

fn finish(value: f64, certificate: State, witness_value: f64, method: Method, tol: f64) -> ComputeResult {
    let residual = (witness_value - value).abs();
    ComputeResult { value, certificate, witness_value, method, residual, attained: residual <= tol }
}

/// Pick the best `(state, witness)` candidate; ties keep the earliest.
fn pick(cands: Vec<(State, f64)>, mode: Extremum) -> (State, f64) {
    let mut it = cands.into_iter();
    let mut best = it.next().expect("at least one candidate");
    for c in it {
        let wins = match mode {
            Extremum::Min => c.1 < best.1,
            Extremum::Max => c.1 > best.1,
        };
        if wins {
            best = c;
        }
    }
    best
}

/// Coordinate directions `+-e_i` (unit in the weighted norm), in index order.
fn coordinate_candidates(t: &Operator, q: Quantity) -> Result<Vec<(State, f64)>> {
    let space = t.space();
    let n = space.dim();
    let mut out = Vec::with_capacity(2 * n);
    for i in 0..n {
        for sign in [1.0, -1.0] {
            let mut e = vec![C64::new(0.0, 0.0); n];
            e[i] = C64::new(sign / space.weight(i), 0.0);
            out.push(certify(t, q, e)?);
        }
    }
    Ok(out)
}

/// Full-control entry point for all four quantities.
pub fn compute_with(
    t: &Operator,
    q: Quantity,
    strategy: Strategy,
    tol: f64,
    opts: &EngineOptions,
) -> Result<ComputeResult> {
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance must be positive, got {tol}")));
    }
    let space = t.space();
    match strategy {
        Strategy::HilbertSweep => {
            if !space.is_hilbert() {
                return Err(Error::NotHilbert { p: space.exponent().to_string() });
            }
            hilbert_path(t, q, tol, opts)
        }
        Strategy::GridOracle => {
            let obj = search_objective(t, q);
            let best = grid_polished(space, &obj, opts.search.grid_resolution, opts.search.min_step)?;
            search_result(t, q, best, Method::GridOracle, tol)
        }
        Strategy::Multistart => search_path(t, q, tol, opts, false),
        Strategy::Auto => {
            if let Some(r) = exact_path(t, q, tol)? {
                return Ok(r);
            }
            if space.is_hilbert() {
                hilbert_path(t, q, tol, opts)
            } else {
                search_path(t, q, tol, opts, opts.grid_check)
            }
        }
    }
}

fn search_result(t: &Operator, q: Quantity, best: Candidate, method: Method, tol: f64) -> Result<ComputeResult> {
    let (state, witness) = certify(t, q, best.point)?;
    Ok(finish(witness, state, witness, method, tol))
}

fn search_path(t: &Operator, q: Quantity, tol: f64, opts: &EngineOptions, grid: bool) -> Result<ComputeResult> {
    let space = t.space();
    let obj = search_objective(t, q);
    let warm: Vec<Vec<C64>> = opts.warm_starts.iter().map(|w| w.coords().to_vec()).collect();
    let mut best = multistart(space, &obj, &warm, &opts.search);
    let mut method = Method::Multistart;
    if grid && space.dim() <= grid_max_dim(space.field()) {
        let g = grid_polished(space, &obj, opts.search.grid_resolution, opts.search.min_step)?;
        if g.value < best.value {
            best = g;
        }
        method = Method::MultistartGrid;
    }
    search_result(t, q, best, method, tol)
}

/// Closed-form cases: kernels, diagonal matrices, `l_1` / `l_inf` operator norms.
fn exact_path(t: &Operator, q: Quantity, tol: f64) -> Result<Option<ComputeResult>> {
    let space = t.space();
    let n = space.dim();
    let m = t.unweighted_matrix();
    let unit = |i: usize, c: C64| {
        let mut e = vec![C64::new(0.0, 0.0); n];
        e[i] = c / space.weight(i);
        e
    };
    match q {
        Quantity::MinNorm | Quantity::Crawford => {
            if let Some(k) = kernel_vector(t) {
                let (state, w) = certify(t, q, k)?;
                return Ok(Some(finish(w, state, w, Method::Kernel, tol)));
            }
            if q == Quantity::MinNorm && t.is_diagonal() {
                let i = (0..n).fold(0, |b, i| if m[(i, i)].norm() < m[(b, b)].norm() { i } else { b });
                let (state, w) = certify(t, q, unit(i, C64::new(1.0, 0.0)))?;
                return Ok(Some(finish(m[(i, i)].norm(), state, w, Method::Diagonal, tol)));
            }
            Ok(None)
        }
        Quantity::OpNorm => {
            if t.is_diagonal() {
                let i = (0..n).fold(0, |b, i| if m[(i, i)].norm() > m[(b, b)].norm() { i } else { b });
                let (state, w) = certify(t, q, unit(i, C64::new(1.0, 0.0)))?;
                return Ok(Some(finish(m[(i, i)].norm(), state, w, Method::Diagonal, tol)));
            }
            match space.exponent() {
                Exponent::Finite(p) if p == 1.0 => {
                    let col = |j: usize| (0..n).map(|i| m[(i, j)].norm()).sum::<f64>();
                    let j = (0..n).fold(0, |b, j| if col(j) > col(b) { j } else { b });
                    let (state, w) = certify(t, q, unit(j, C64::new(1.0, 0.0)))?;
                    Ok(Some(finish(col(j), state, w, Method::ColumnSum, tol)))
                }
                Exponent::Infinity => {
                    let row = |i: usize| (0..n).map(|j| m[(i, j)].norm()).sum::<f64>();
                    let i = (0..n).fold(0, |b, i| if row(i) > row(b) { i } else { b });
                    let x: Vec<C64> = (0..n)
                        .map(|j| crate::space::phase(m[(i, j)]).conj() / space.weight(j))
                        .collect();
                    let (state, w) = certify(t, q, x)?;
                    Ok(Some(finish(row(i), state, w, Method::RowSum, tol)))
                }
                _ => Ok(None),
            }
        }
        Quantity::Radius => Ok(None),
    }
}

/// A unit kernel vector when the matrix is numerically singular.
pub(crate) fn kernel_vector(t: &Operator) -> Option<Vec<C64>> {
    let (sv, vecs) = svd_right(t.matrix());
    let smax = sv.first().copied().unwrap_or(0.0);
    let smin = sv.last().copied().unwrap_or(0.0);
    if smin > KERNEL_TOL * smax.max(1.0) {
        return None;
    }
    let mut v: Vec<C64> = vecs.last()?.iter().copied().collect();
    normalize_phase(&mut v);
    if t.space().field() == Field::Real {
        v.iter_mut().for_each(|c| c.im = 0.0);
    }
    let nrm = t.space().norm_of(&v);
    if nrm == 0.0 {
        return None;
    }
    v.iter_mut().for_each(|c| *c /= nrm);
    Some(v)
}

fn hilbert_path(t: &Operator, q: Quantity, tol: f64, opts: &EngineOptions) -> Result<ComputeResult> {
    match q {
        Quantity::Crawford | Quantity::Radius => {
            let sw = hilbert_sweep(t, opts.sweep_samples.max(8))?;
            let (value, point) = match q {
                Quantity::Crawford => (sw.c, sw.c_point.clone()),
                _ => (sw.nu, sw.nu_point.clone()),
            };
            let mut cands = coordinate_candidates(t, q)?;
            cands.push(certify(t, q, point)?);
            let (state, w) = pick(cands, q.extremum());
            Ok(finish(value, state, w, Method::HilbertSweep, tol))
        }
        Quantity::MinNorm | Quantity::OpNorm => {
            let space = t.space();
            let (sv, vecs) = svd_right(&t.unweighted_matrix());
            let (value, v) = match q {
                Quantity::OpNorm => (sv[0], &vecs[0]),
                _ => (*sv.last().expect("nonempty"), vecs.last().expect("nonempty")),
            };
            let mut x: Vec<C64> = v.iter().enumerate().map(|(i, c)| c / space.weight(i)).collect();
            normalize_phase(&mut x);
            if space.field() == Field::Real {
                x.iter_mut().for_each(|c| c.im = 0.0);
            }
            let mut cands = coordinate_candidates(t, q)?;
            cands.push(certify(t, q, x)?);
            let (state, w) = pick(cands, q.extremum());
            Ok(finish(value, state, w, Method::Svd, tol))
        }
    }
}

/// Exhaustive-grid value of a quantity, polished locally inside the best
/// grid cells. Independent of the eigenvalue and SVD routes.
pub fn grid_oracle(t: &Operator, q: Quantity, resolution: usize) -> Result<f64> {
    let obj = search_objective(t, q);
    let best = grid_polished(t.space(), &obj, resolution, 1e-13)?;
    Ok(certify(t, q, best.point)?.1)
}
