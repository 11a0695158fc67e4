//! Derivative-free minimization over the unit sphere of a space: compass
//! search with shrinking steps, seeded multi-start, and exhaustive angular
//! grids for small dimensions.
//!
//! Objectives receive unit vectors and return the value to minimize; callers
//! negate for maximization. Points on `l_1` / `l_inf` spheres are snapped onto
//! nearby lower-dimensional faces so the search can sit exactly on the
//! nonsmooth ridges where those objectives typically attain their optimum.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::space::{phase, sample_sphere, Exponent, Field, SpaceDescriptor, Vector};

const SNAP_TOL: f64 = 1e-10;

/// Tuning of the multi-start search and the grid oracle.
#[derive(Clone, Debug, PartialEq)]
pub struct SearchConfig {
    /// Number of seeded starting points (coordinate directions included).
    pub starts: usize,
    /// Grid subdivisions of `pi` per angular coordinate.
    pub grid_resolution: usize,
    /// How many of the best coarse results get a fine local refinement.
    pub refine: usize,
    /// Smallest compass step of the fine refinement.
    pub min_step: f64,
    pub seed: u64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig { starts: 32, grid_resolution: 400, refine: 4, min_step: 1e-13, seed: 0 }
    }
}

/// Largest dimension covered by the exhaustive grid for the given field.
pub fn grid_max_dim(field: Field) -> usize {
    match field {
        Field::Real => 3,
        Field::Complex => 2,
    }
}

/// Radially normalize and snap; `false` for the zero vector.
pub(crate) fn project(space: &SpaceDescriptor, x: &mut [C64]) -> bool {
    let nrm = space.norm_of(x);
    if !(nrm > 0.0 && nrm.is_finite()) {
        return false;
    }
    x.iter_mut().for_each(|c| *c /= nrm);
    match space.exponent() {
        Exponent::Infinity => {
            for (i, c) in x.iter_mut().enumerate() {
                let w = space.weight(i);
                if w * c.norm() >= 1.0 - SNAP_TOL {
                    *c = phase(*c) / w;
                }
            }
        }
        Exponent::Finite(p) if p == 1.0 => {
            let mut changed = false;
            for (i, c) in x.iter_mut().enumerate() {
                if c.norm() != 0.0 && space.weight(i) * c.norm() <= SNAP_TOL {
                    *c = C64::new(0.0, 0.0);
                    changed = true;
                }
            }
            if changed {
                let nrm = space.norm_of(x);
                x.iter_mut().for_each(|c| *c /= nrm);
            }
        }
        _ => {}
    }
    true
}

/// Compass search from `start` (a unit vector); returns the best value and point.
pub(crate) fn local_search<F>(
    space: &SpaceDescriptor,
    obj: &F,
    start: &[C64],
    step0: f64,
    min_step: f64,
) -> (f64, Vec<C64>)
where
    F: Fn(&[C64]) -> f64,
{
    let n = space.dim();
    let rd = space.field().real_dim();
    let mut x = start.to_vec();
    let mut fx = obj(&x);
    let mut trial = vec![C64::new(0.0, 0.0); n];
    let mut step = step0;
    let max_evals = 4000 * n * rd;
    let mut evals = 0usize;
    while step >= min_step && evals < max_evals {
        let mut improved = false;
        'poll: for k in 0..n * rd {
            for sign in [1.0, -1.0] {
                let mut cur_step = step;
                let mut moved = false;
                // extend along a successful direction while it keeps paying off
                for _ in 0..16 {
                    trial.copy_from_slice(&x);
                    let delta = sign * cur_step;
                    let i = k / rd;
                    let c = x[i];
                    let r = c.norm();
                    // complex coordinates move in modulus and phase, so that
                    // phase moves keep l_inf ridges and l_1 supports intact
                    trial[i] = if rd == 1 || r == 0.0 {
                        if k % rd == 0 { c + delta } else { c + C64::new(0.0, delta) }
                    } else if k % rd == 0 {
                        c + phase(c) * delta
                    } else {
                        let angle = (delta / (space.weight(i) * r)).clamp(-PI, PI);
                        c * C64::from_polar(1.0, angle)
                    };
                    if !project(space, &mut trial) {
                        break;
                    }
                    let ft = obj(&trial);
                    evals += 1;
                    if ft < fx {
                        fx = ft;
                        x.copy_from_slice(&trial);
                        moved = true;
                        cur_step *= 2.0;
                    } else {
                        break;
                    }
                }
                if moved {
                    improved = true;
                    break 'poll;
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    (fx, x)
}

/// Quasi-Newton refinement for smooth spheres (`1 < p < inf`), in the chart
/// `u -> project(start + u)` with central-difference gradients. Compass
/// search crawls along narrow valleys; this finishes them off. Only
/// decreases are accepted.
pub(crate) fn smooth_polish<F>(space: &SpaceDescriptor, obj: &F, start: &[C64], f0: f64) -> (f64, Vec<C64>)
where
    F: Fn(&[C64]) -> f64,
{
    if !space.exponent().is_smooth() || !(f0.is_finite()) {
        return (f0, start.to_vec());
    }
    let rd = space.field().real_dim();
    let m = space.dim() * rd;
    let point = |t: &[f64]| -> Option<Vec<C64>> {
        let mut x = start.to_vec();
        for (k, tk) in t.iter().enumerate() {
            let d = if k % rd == 0 { C64::new(*tk, 0.0) } else { C64::new(0.0, *tk) };
            x[k / rd] += d;
        }
        project(space, &mut x).then_some(x)
    };
    let eval = |t: &[f64]| point(t).map_or(f64::INFINITY, |x| obj(&x));
    let h = 1e-7;
    let grad = |t: &[f64]| -> Vec<f64> {
        let mut tt = t.to_vec();
        (0..m)
            .map(|k| {
                tt[k] = t[k] + h;
                let fp = eval(&tt);
                tt[k] = t[k] - h;
                let fm = eval(&tt);
                tt[k] = t[k];
                (fp - fm) / (2.0 * h)
            })
            .collect()
    };
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();

    let mut t = vec![0.0; m];
    let mut f = f0;
    let mut g = grad(&t);
    let mut hinv: Option<Vec<f64>> = None;
    for _ in 0..60 {
        let gn = dot(&g, &g).sqrt();
        if !(gn > 0.0) || f <= 0.0 {
            break;
        }
        let mut dir: Vec<f64> = match &hinv {
            Some(hm) => (0..m).map(|i| -dot(&hm[i * m..(i + 1) * m], &g)).collect(),
            None => g.iter().map(|x| -x * (1e-2 / gn).min(1.0)).collect(),
        };
        let mut slope = dot(&g, &dir);
        if !(slope < 0.0) {
            hinv = None;
            dir = g.iter().map(|x| -x * (1e-2 / gn).min(1.0)).collect();
            slope = dot(&g, &dir);
        }
        let mut alpha = 1.0;
        let mut next = None;
        for _ in 0..50 {
            let tn: Vec<f64> = t.iter().zip(&dir).map(|(a, d)| a + alpha * d).collect();
            let fnew = eval(&tn);
            if fnew < f && fnew <= f + 1e-4 * alpha * slope {
                next = Some((tn, fnew));
                break;
            }
            alpha *= 0.5;
        }
        let Some((tn, fnew)) = next else { break };
        let gnew = grad(&tn);
        let s: Vec<f64> = tn.iter().zip(&t).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = gnew.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-300 {
            let hm = hinv.get_or_insert_with(|| {
                let scale = sy / dot(&y, &y);
                let mut id = vec![0.0; m * m];
                (0..m).for_each(|i| id[i * m + i] = scale);
                id
            });
            // H <- (I - rho s y^T) H (I - rho y s^T) + rho s s^T
            let rho = 1.0 / sy;
            let hy: Vec<f64> = (0..m).map(|i| dot(&hm[i * m..(i + 1) * m], &y)).collect();
            let yhy = dot(&y, &hy);
            for i in 0..m {
                for j in 0..m {
                    hm[i * m + j] +=
                        -rho * (s[i] * hy[j] + hy[i] * s[j]) + (rho * rho * yhy + rho) * s[i] * s[j];
                }
            }
        }
        t = tn;
        f = fnew;
        g = gnew;
    }
    match point(&t) {
        Some(x) if f < f0 => (f, x),
        _ => (f0, start.to_vec()),
    }
}

/// One search candidate, ordered by value then by origin index.
#[derive(Clone, Debug)]
pub(crate) struct Candidate {
    pub value: f64,
    pub point: Vec<C64>,
}

fn better(a: f64, b: f64) -> bool {
    a < b
}

/// Multi-start minimization. Warm starts are tried before the seeded batch,
/// and ties keep the earliest candidate.
pub(crate) fn multistart<F>(
    space: &SpaceDescriptor,
    obj: &F,
    warm: &[Vec<C64>],
    cfg: &SearchConfig,
) -> Candidate
where
    F: Fn(&[C64]) -> f64,
{
    let mut starts: Vec<Vec<C64>> = warm
        .iter()
        .filter_map(|w| {
            let mut w = w.clone();
            project(space, &mut w).then_some(w)
        })
        .collect();
    starts.extend(sample_sphere(space, cfg.seed, cfg.starts.max(1)).into_iter().map(Vector::into_coords));

    let mut coarse: Vec<(usize, Candidate)> = starts
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let (value, point) = local_search(space, obj, s, 0.25, 1e-3);
            (i, Candidate { value, point })
        })
        .collect();
    coarse.sort_by(|a, b| a.1.value.total_cmp(&b.1.value).then(a.0.cmp(&b.0)));

    let mut best: Option<Candidate> = None;
    for (_, c) in coarse.into_iter().take(cfg.refine.max(1)) {
        let (value, point) = local_search(space, obj, &c.point, 1e-3, cfg.min_step);
        let (value, point) = smooth_polish(space, obj, &point, value);
        if best.as_ref().is_none_or(|b| better(value, b.value)) {
            best = Some(Candidate { value, point });
        }
    }
    best.expect("at least one start")
}

/// Unit-sphere grid points for dimension <= 3 (real) or <= 2 (complex),
/// modulo the sign/phase symmetry shared by every objective in this crate.
pub(crate) fn grid_points(space: &SpaceDescriptor, resolution: usize) -> Result<GridIter> {
    let n = space.dim();
    let max = grid_max_dim(space.field());
    if n > max {
        return Err(Error::DimensionTooLarge { dim: n, max });
    }
    if resolution < 2 {
        return Err(Error::InvalidArgument("grid resolution must be at least 2".into()));
    }
    let (outer, inner) = match (space.field(), n) {
        (_, 1) => (1, 1),
        (Field::Real, 2) => (resolution, 1),
        (Field::Real, _) => (resolution + 1, resolution),
        (Field::Complex, _) => (resolution / 2 + 1, 2 * resolution),
    };
    Ok(GridIter { field: space.field(), dim: n, resolution, outer, inner, i: 0, j: 0 })
}

/// Angular grid spacing in radians.
pub(crate) fn grid_step(resolution: usize) -> f64 {
    std::f64::consts::PI / resolution as f64
}

pub(crate) struct GridIter {
    field: Field,
    dim: usize,
    resolution: usize,
    outer: usize,
    inner: usize,
    i: usize,
    j: usize,
}

impl Iterator for GridIter {
    type Item = Vec<C64>;

    fn next(&mut self) -> Option<Vec<C64>> {
        if self.i >= self.outer {
            return None;
        }
        let h = grid_step(self.resolution);
        let (a, b) = (self.i as f64 * h, self.j as f64 * h);
        let z = |re: f64| C64::new(re, 0.0);
        let point = match (self.field, self.dim) {
            (_, 1) => vec![z(1.0)],
            (Field::Real, 2) => vec![z(a.cos()), z(a.sin())],
            (Field::Real, _) => vec![z(a.sin() * b.cos()), z(a.sin() * b.sin()), z(a.cos())],
            (Field::Complex, _) => vec![z(a.cos()), C64::from_polar(a.sin(), b)],
        };
        self.j += 1;
        if self.j >= self.inner {
            self.j = 0;
            self.i += 1;
        }
        Some(point)
    }
}

/// Exhaustive grid minimization; returns up to `keep` best points that are
/// pairwise separated by more than a few grid cells, best first.
pub(crate) fn grid_scan<F>(
    space: &SpaceDescriptor,
    obj: &F,
    resolution: usize,
    keep: usize,
) -> Result<Vec<Candidate>>
where
    F: Fn(&[C64]) -> f64,
{
    let sep = 4.0 * grid_step(resolution);
    let mut kept: Vec<Candidate> = Vec::with_capacity(keep + 1);
    for mut dir in grid_points(space, resolution)? {
        if !project_plain(space, &mut dir) {
            continue;
        }
        let v = obj(&dir);
        if kept.len() == keep && !better(v, kept[keep - 1].value) {
            continue;
        }
        if let Some(pos) = kept.iter().position(|c| euclid_dist(&c.point, &dir) < sep) {
            if better(v, kept[pos].value) {
                kept.remove(pos);
            } else {
                continue;
            }
        }
        let at = kept.iter().position(|c| better(v, c.value)).unwrap_or(kept.len());
        kept.insert(at, Candidate { value: v, point: dir });
        kept.truncate(keep);
    }
    Ok(kept)
}

/// Radial normalization without snapping (pure grid).
fn project_plain(space: &SpaceDescriptor, x: &mut [C64]) -> bool {
    let nrm = space.norm_of(x);
    if !(nrm > 0.0 && nrm.is_finite()) {
        return false;
    }
    x.iter_mut().for_each(|c| *c /= nrm);
    true
}

fn euclid_dist(a: &[C64], b: &[C64]) -> f64 {
    // sign/phase classes: compare against both x and -x
    let plus: f64 = a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum();
    let minus: f64 = a.iter().zip(b).map(|(x, y)| (x + y).norm_sqr()).sum();
    plus.min(minus).sqrt()
}

/// Grid scan followed by local polishing of the kept points.
pub(crate) fn grid_polished<F>(
    space: &SpaceDescriptor,
    obj: &F,
    resolution: usize,
    min_step: f64,
) -> Result<Candidate>
where
    F: Fn(&[C64]) -> f64,
{
    let kept = grid_scan(space, obj, resolution, 4)?;
    let h = grid_step(resolution);
    let mut best: Option<Candidate> = None;
    for c in kept {
        let (value, point) = if value_is_floor(c.value) {
            (c.value, c.point)
        } else {
            let (v, x) = local_search(space, obj, &c.point, h, min_step);
            smooth_polish(space, obj, &x, v)
        };
        if best.as_ref().is_none_or(|b| better(value, b.value)) {
            best = Some(Candidate { value, point });
        }
    }
    best.ok_or_else(|| Error::EmptyInput("grid produced no points".into()))
}

fn value_is_floor(v: f64) -> bool {
    v == 0.0
}
