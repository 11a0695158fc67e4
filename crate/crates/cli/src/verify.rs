//! Invariant harness behind `crawford verify`. Instances are generated from
//! `(seed, index)` alone, so any failure dump replays with
//! `{"seed": s, "only": [index]}`.

use std::time::Instant;

use crawford_core::bpb::{bpb_refine, state_bound, BpbConfig};
use crawford_core::json::{operator_to_json, space_to_json};
use crawford_core::rng::seeded;
use crawford_core::{
    adjoint, compute_with, default_tol, duality_face, repair_dispatch, sample_sphere, EngineOptions, Field,
    Operator, Quantity, SpaceDescriptor, State, Strategy,
};
use num_complex::Complex64 as C64;
use rand::Rng;
use serde_json::{json, Value};

use crate::error::{CliError, CliResult};

pub const INVARIANTS: [&str; 8] =
    ["ordering", "attainment", "adjoint", "lipschitz", "state_positivity", "truncation", "repair", "bpb"];

#[derive(Clone, Debug, PartialEq)]
pub struct VerifyConfig {
    pub instances: usize,
    pub dims: Vec<usize>,
    pub ps: Vec<f64>,
    pub fields: Vec<Field>,
    pub seed: u64,
    /// Repair radius and BPB `eps`.
    pub eps: f64,
    /// Replaces the Lipschitz check by its negation; harness self-test only.
    pub planted_bug: bool,
    /// Run only these instance indices.
    pub only: Option<Vec<usize>>,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            instances: 200,
            dims: vec![2, 3],
            ps: vec![1.0, 1.5, 2.0, 3.0, f64::INFINITY],
            fields: vec![Field::Real, Field::Complex],
            seed: 0,
            eps: 0.5,
            planted_bug: false,
            only: None,
        }
    }
}

fn bad(msg: impl Into<String>) -> CliError {
    CliError::Input(msg.into())
}

impl VerifyConfig {
    /// Missing keys keep their defaults.
    pub fn from_json(v: &Value) -> CliResult<VerifyConfig> {
        let mut cfg = VerifyConfig::default();
        let obj = v.as_object().ok_or_else(|| bad("verify config must be a JSON object"))?;
        for (key, val) in obj {
            match key.as_str() {
                "instances" => cfg.instances = val.as_u64().ok_or_else(|| bad("instances must be an integer"))? as usize,
                "dims" => {
                    cfg.dims = list(val, "dims")?
                        .iter()
                        .map(|d| d.as_u64().filter(|&d| d > 0).map(|d| d as usize).ok_or_else(|| bad("dims must be positive integers")))
                        .collect::<CliResult<_>>()?
                }
                "ps" => {
                    cfg.ps = list(val, "ps")?
                        .iter()
                        .map(|p| match p {
                            Value::String(s) if s == "inf" => Ok(f64::INFINITY),
                            other => other.as_f64().ok_or_else(|| bad("ps must be numbers or \"inf\"")),
                        })
                        .collect::<CliResult<_>>()?
                }
                "fields" => {
                    cfg.fields = list(val, "fields")?
                        .iter()
                        .map(|f| match f.as_str() {
                            Some("real") => Ok(Field::Real),
                            Some("complex") => Ok(Field::Complex),
                            _ => Err(bad("fields must be \"real\" or \"complex\"")),
                        })
                        .collect::<CliResult<_>>()?
                }
                "seed" => cfg.seed = val.as_u64().ok_or_else(|| bad("seed must be a non-negative integer"))?,
                "eps" => cfg.eps = val.as_f64().ok_or_else(|| bad("eps must be a number"))?,
                "planted_bug" => cfg.planted_bug = val.as_bool().ok_or_else(|| bad("planted_bug must be a boolean"))?,
                "only" => {
                    cfg.only = Some(
                        list(val, "only")?
                            .iter()
                            .map(|i| i.as_u64().map(|i| i as usize).ok_or_else(|| bad("only must list instance indices")))
                            .collect::<CliResult<_>>()?,
                    )
                }
                other => return Err(bad(format!("unknown verify config key \"{other}\""))),
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> CliResult<()> {
        if self.dims.is_empty() || self.ps.is_empty() || self.fields.is_empty() {
            return Err(bad("dims, ps and fields must be non-empty"));
        }
        if !(self.eps > 0.0 && self.eps < 4.0) {
            return Err(bad(format!("eps must lie in (0, 4), got {}", self.eps)));
        }
        for &p in &self.ps {
            if !(p >= 1.0) {
                return Err(bad(format!("p must be at least 1, got {p}")));
            }
        }
        Ok(())
    }

    fn to_json(&self) -> Value {
        let ps: Vec<Value> =
            self.ps.iter().map(|&p| if p.is_infinite() { json!("inf") } else { json!(p) }).collect();
        let fields: Vec<&str> = self
            .fields
            .iter()
            .map(|f| match f {
                Field::Real => "real",
                Field::Complex => "complex",
            })
            .collect();
        json!({
            "instances": self.instances,
            "dims": self.dims,
            "ps": ps,
            "fields": fields,
            "seed": self.seed,
            "eps": self.eps,
            "planted_bug": self.planted_bug,
            "only": self.only,
        })
    }

    /// Space of instance `i`: cycles dims fastest, then exponents, then fields.
    pub fn space(&self, i: usize) -> SpaceDescriptor {
        let nd = self.dims.len();
        let np = self.ps.len();
        let dim = self.dims[i % nd];
        let p = self.ps[(i / nd) % np];
        let field = self.fields[(i / (nd * np)) % self.fields.len()];
        SpaceDescriptor::lp(dim, field, p).expect("validated config")
    }

    pub fn instance_seed(&self, i: usize) -> u64 {
        self.seed.wrapping_add((i as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15))
    }
}

fn list<'a>(v: &'a Value, what: &str) -> CliResult<&'a Vec<Value>> {
    v.as_array().ok_or_else(|| bad(format!("{what} must be an array")))
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Tally {
    pub checked: usize,
    pub passed: usize,
    /// Smallest margin seen; negative means violated.
    pub worst_margin: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FailureDump {
    pub invariant: &'static str,
    pub instance: usize,
    pub seed: u64,
    pub margin: Option<f64>,
    pub detail: String,
    pub space: Value,
    pub operator: Value,
}

#[derive(Clone, Debug, PartialEq)]
pub struct VerifyReport {
    pub config: VerifyConfig,
    pub tallies: Vec<(&'static str, Tally)>,
    pub failures: Vec<FailureDump>,
    pub warnings: Vec<String>,
    pub wall_clock_s: f64,
}

impl VerifyReport {
    pub fn all_passed(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn tally(&self, name: &str) -> Option<&Tally> {
        self.tallies.iter().find(|(n, _)| *n == name).map(|(_, t)| t)
    }

    pub fn to_json(&self) -> Value {
        let invariants: Vec<Value> = self
            .tallies
            .iter()
            .map(|(name, t)| {
                json!({
                    "name": name,
                    "checked": t.checked,
                    "passed": t.passed,
                    "failed": t.checked - t.passed,
                    "worst_margin": t.worst_margin,
                })
            })
            .collect();
        let failures: Vec<Value> = self
            .failures
            .iter()
            .map(|f| {
                json!({
                    "invariant": f.invariant,
                    "instance": f.instance,
                    "seed": f.seed,
                    "margin": f.margin,
                    "detail": f.detail,
                    "space": f.space,
                    "operator": f.operator,
                    "replay": {"seed": self.config.seed, "only": [f.instance]},
                })
            })
            .collect();
        json!({
            "config": self.config.to_json(),
            "all_passed": self.all_passed(),
            "invariants": invariants,
            "failures": failures,
            "warnings": self.warnings,
            "wall_clock_s": self.wall_clock_s,
        })
    }
}

/// One check: `Ok(margin)` with the invariant holding iff `margin >= 0`.
type Check = CliResult<f64>;

fn value(t: &Operator, q: Quantity, tol: f64) -> CliResult<f64> {
    Ok(compute_with(t, q, Strategy::Auto, tol, &EngineOptions::default())?.value)
}

fn random_operator<R: Rng>(rng: &mut R, s: &SpaceDescriptor, scale: f64) -> Operator {
    let n = s.dim();
    let rows: Vec<Vec<C64>> = (0..n)
        .map(|_| {
            (0..n)
                .map(|_| {
                    let im = if s.field() == Field::Complex { rng.gen_range(-1.0..1.0) } else { 0.0 };
                    C64::new(rng.gen_range(-1.0..1.0), im) * scale
                })
                .collect()
        })
        .collect();
    Operator::from_rows(s.clone(), &rows).expect("square matrix")
}

struct Instance {
    t: Operator,
    e: Operator,
    tol: f64,
    seed: u64,
}

fn ordering(x: &Instance) -> Check {
    let c = value(&x.t, Quantity::Crawford, x.tol)?;
    let nu = value(&x.t, Quantity::Radius, x.tol)?;
    let m = value(&x.t, Quantity::MinNorm, x.tol)?;
    let n = value(&x.t, Quantity::OpNorm, x.tol)?;
    Ok([(c, nu), (nu, n), (c, m), (m, n)].iter().map(|(lo, hi)| hi - lo + 2.0 * x.tol).fold(f64::INFINITY, f64::min))
}

fn attainment(x: &Instance) -> Check {
    let r = compute_with(&x.t, Quantity::Crawford, Strategy::Auto, x.tol, &EngineOptions::default())?;
    Ok(x.tol - r.residual)
}

fn adjoint_check(x: &Instance) -> Check {
    let a = value(&x.t, Quantity::Crawford, x.tol)?;
    let b = value(&adjoint(&x.t), Quantity::Crawford, x.tol)?;
    Ok((2.0 * x.tol).max(1e-3) - (a - b).abs())
}

fn lipschitz(x: &Instance, planted: bool) -> Check {
    let te = x.t.add(&x.e)?;
    let en = value(&x.e, Quantity::OpNorm, x.tol)?;
    let mut worst = f64::INFINITY;
    for q in [Quantity::Crawford, Quantity::Radius, Quantity::MinNorm] {
        let margin = en + 2.0 * x.tol - (value(&te, q, x.tol)? - value(&x.t, q, x.tol)?).abs();
        worst = worst.min(if planted { -margin } else { margin });
    }
    Ok(worst)
}

fn state_positivity(x: &Instance) -> Check {
    let s = x.t.space();
    let mut rng = seeded(x.seed ^ 0x5);
    let mut worst = f64::INFINITY;
    for v in sample_sphere(s, x.seed, 50) {
        let face = duality_face(s, &v)?;
        let st = State::new(s, v, face.sample(&mut rng))?;
        for (a, b) in st.xstar().coords().iter().zip(st.x().coords()) {
            worst = worst.min((a * b).re + 1e-10);
        }
    }
    Ok(worst)
}

fn truncation(x: &Instance) -> Check {
    let s = x.t.space();
    let n = s.dim();
    let diag: Vec<f64> = (1..=n).map(|k| 1.0 / k as f64).collect();
    let t = Operator::diagonal(s.clone(), &diag)?;
    let mut worst = f64::INFINITY;
    for k in 0..n {
        let tk: Vec<f64> = diag.iter().enumerate().map(|(i, d)| if i < k { *d } else { 0.0 }).collect();
        let diff = t.sub(&Operator::diagonal(s.clone(), &tk)?)?;
        let nrm = value(&diff, Quantity::OpNorm, x.tol)?;
        worst = worst.min(2.0 / (k as f64 + 1.0) + 1e-9 - nrm);
    }
    Ok(worst)
}

fn repair(x: &Instance, eps: f64) -> Check {
    let out = repair_dispatch(&x.t, eps, x.seed)?;
    let cs = value(&out.s, Quantity::Crawford, default_tol(&out.s, Strategy::Auto))?;
    Ok((eps - out.distance).min(1e-6 - (out.certificate_value() - cs).abs()))
}

/// Only on `1 < p < inf`, with `T = 2I + 0.4 R` so that `c(T)` stays above
/// the step sizes.
fn bpb(x: &Instance, eps: f64) -> Option<Check> {
    let s = x.t.space();
    if !s.exponent().is_smooth() {
        return None;
    }
    Some((|| {
        let t = Operator::identity(s.clone()).scaled(C64::new(2.0, 0.0))?.add(&x.t.scaled(C64::new(0.4, 0.0))?)?;
        let start = compute_with(&t, Quantity::Crawford, Strategy::Auto, 1e-8, &EngineOptions::default())?.certificate;
        let cfg = BpbConfig::new(eps);
        let tr = bpb_refine(&t, &start, &cfg)?;
        let mut worst = eps / 2.0 + 1e-9 - tr.total_distance;
        for st in &tr.steps {
            let b = state_bound(s, eps, st.n, tr.start_gap) + cfg.inner_slack;
            worst = worst
                .min(st.step_size + 1e-12 - st.op_delta)
                .min(b - st.state_delta_x)
                .min(b - st.state_delta_xstar);
        }
        let cs = value(&tr.s, Quantity::Crawford, cfg.inner_tol)?;
        let z = &tr.final_state;
        let zval = z.xstar().eval(&crawford_core::apply(&tr.s, z.x())?).norm();
        Ok(worst.min(cfg.inner_tol + tr.tail - (zval - cs).abs()))
    })())
}

pub fn run(cfg: &VerifyConfig) -> CliResult<VerifyReport> {
    cfg.validate()?;
    let clock = Instant::now();
    let indices: Vec<usize> = match &cfg.only {
        Some(list) => list.clone(),
        None => (0..cfg.instances).collect(),
    };
    let mut tallies: Vec<(&'static str, Tally)> = INVARIANTS.iter().map(|n| (*n, Tally::default())).collect();
    let mut failures = Vec::new();
    let mut warnings = Vec::new();
    if indices.is_empty() {
        warnings.push("no instances configured; every invariant passes vacuously".to_string());
    }

    for &i in &indices {
        let seed = cfg.instance_seed(i);
        let space = cfg.space(i);
        let mut rng = seeded(seed);
        let t = random_operator(&mut rng, &space, 1.0);
        let scale = rng.gen_range(0.01..0.5);
        let e = random_operator(&mut rng, &space, scale);
        let x = Instance { tol: default_tol(&t, Strategy::Auto), t, e, seed };
        for (name, tally) in tallies.iter_mut() {
            let result = match *name {
                "ordering" => ordering(&x),
                "attainment" => attainment(&x),
                "adjoint" => adjoint_check(&x),
                "lipschitz" => lipschitz(&x, cfg.planted_bug),
                "state_positivity" => state_positivity(&x),
                "truncation" => truncation(&x),
                "repair" => repair(&x, cfg.eps),
                "bpb" => match bpb(&x, cfg.eps) {
                    Some(r) => r,
                    None => continue,
                },
                _ => unreachable!("unknown invariant"),
            };
            tally.checked += 1;
            let (margin, detail) = match result {
                Ok(m) => (Some(m), String::new()),
                Err(err) => (None, err.to_string()),
            };
            if let Some(m) = margin {
                tally.worst_margin = Some(tally.worst_margin.map_or(m, |w| w.min(m)));
            }
            if margin.is_some_and(|m| m >= 0.0) {
                tally.passed += 1;
            } else {
                failures.push(FailureDump {
                    invariant: name,
                    instance: i,
                    seed,
                    margin,
                    detail,
                    space: space_to_json(&space),
                    operator: operator_to_json(&x.t),
                });
            }
        }
    }
    Ok(VerifyReport {
        config: cfg.clone(),
        tallies,
        failures,
        warnings,
        wall_clock_s: clock.elapsed().as_secs_f64(),
    })
}
