//! JSON wire formats. Real scalars are plain numbers, complex scalars are
//! `[re, im]` pairs; `p` is a number or `"inf"`; weights are numbers or
//! `"a/b"` strings.

use num_complex::Complex64 as C64;
use serde_json::{json, Map, Value};

use crate::bpb::BpbTrace;
use crate::crawford::{ComputeResult, WitnessReport};
use crate::error::{Error, Result};
use crate::oper::Operator;
use crate::repair::{PolytopeCase, PolytopeOutcome, RepairOutcome};
use crate::space::{Exponent, Field, Functional, NormFamily, SpaceDescriptor, State, Vector};

fn perr(msg: impl Into<String>) -> Error {
    Error::Parse(msg.into())
}

fn field_of<'a>(v: &'a Value, key: &str) -> Result<&'a Value> {
    v.get(key).ok_or_else(|| perr(format!("missing field \"{key}\"")))
}

fn as_f64(v: &Value, what: &str) -> Result<f64> {
    v.as_f64().ok_or_else(|| perr(format!("{what} must be a number")))
}

fn as_array<'a>(v: &'a Value, what: &str) -> Result<&'a Vec<Value>> {
    v.as_array().ok_or_else(|| perr(format!("{what} must be an array")))
}

fn parse_ratio(s: &str) -> Result<f64> {
    let s = s.trim();
    let (a, b) = match s.split_once('/') {
        Some((a, b)) => (a.trim(), b.trim()),
        None => (s, "1"),
    };
    let a: f64 = a.parse().map_err(|_| perr(format!("bad number '{s}'")))?;
    let b: f64 = b.parse().map_err(|_| perr(format!("bad number '{s}'")))?;
    Ok(a / b)
}

pub fn scalar_to_json(field: Field, c: C64) -> Value {
    match field {
        Field::Real => json!(c.re),
        Field::Complex => json!([c.re, c.im]),
    }
}

pub fn scalar_from_json(v: &Value) -> Result<C64> {
    match v {
        Value::Number(n) => Ok(C64::new(n.as_f64().ok_or_else(|| perr("bad number"))?, 0.0)),
        Value::String(s) => Ok(C64::new(parse_ratio(s)?, 0.0)),
        Value::Array(a) if a.len() == 2 => Ok(C64::new(as_f64(&a[0], "re")?, as_f64(&a[1], "im")?)),
        _ => Err(perr("scalar must be a number or a [re, im] pair")),
    }
}

pub fn coords_to_json(field: Field, coords: &[C64]) -> Value {
    Value::Array(coords.iter().map(|c| scalar_to_json(field, *c)).collect())
}

pub fn coords_from_json(v: &Value) -> Result<Vec<C64>> {
    as_array(v, "vector")?.iter().map(scalar_from_json).collect()
}

pub fn space_to_json(s: &SpaceDescriptor) -> Value {
    let p = match s.exponent() {
        Exponent::Infinity => json!("inf"),
        Exponent::Finite(p) => json!(p),
    };
    let field = match s.field() {
        Field::Real => "real",
        Field::Complex => "complex",
    };
    let mut m = Map::new();
    m.insert("dim".into(), json!(s.dim()));
    m.insert("field".into(), json!(field));
    m.insert("p".into(), p);
    if let NormFamily::WeightedLp(_, w) = s.norm_family() {
        m.insert("weights".into(), json!(w));
    }
    Value::Object(m)
}

pub fn space_from_json(v: &Value) -> Result<SpaceDescriptor> {
    let dim = field_of(v, "dim")?.as_u64().ok_or_else(|| perr("dim must be a positive integer"))? as usize;
    let field = match v.get("field").and_then(Value::as_str).unwrap_or("real") {
        "real" => Field::Real,
        "complex" => Field::Complex,
        other => return Err(perr(format!("unknown field '{other}'"))),
    };
    let p = match field_of(v, "p")? {
        Value::String(s) if s == "inf" || s == "infinity" => f64::INFINITY,
        Value::String(s) => parse_ratio(s)?,
        other => as_f64(other, "p")?,
    };
    match v.get("weights") {
        None | Some(Value::Null) => SpaceDescriptor::lp(dim, field, p),
        Some(w) => {
            let w = as_array(w, "weights")?
                .iter()
                .map(|x| match x {
                    Value::String(s) => parse_ratio(s),
                    other => as_f64(other, "weight"),
                })
                .collect::<Result<Vec<f64>>>()?;
            SpaceDescriptor::weighted_lp(dim, field, p, w)
        }
    }
}

pub fn operator_to_json(t: &Operator) -> Value {
    let f = t.space().field();
    let m = t.matrix();
    let rows: Vec<Value> =
        (0..t.dim()).map(|i| Value::Array((0..t.dim()).map(|j| scalar_to_json(f, m[(i, j)])).collect())).collect();
    json!({"space": space_to_json(t.space()), "matrix": rows})
}

/// Operator from `{"space": ..., "matrix": [[...]]}`; `space` may be
/// supplied out of band instead.
pub fn operator_from_json(v: &Value, space: Option<&SpaceDescriptor>) -> Result<Operator> {
    let rows = as_array(field_of(v, "matrix")?, "matrix")?
        .iter()
        .map(coords_from_json)
        .collect::<Result<Vec<_>>>()?;
    if rows.is_empty() {
        return Err(perr("matrix must have at least one row"));
    }
    let space = match (space, v.get("space")) {
        (Some(s), _) => s.clone(),
        (None, Some(s)) => space_from_json(s)?,
        (None, None) => {
            let field = if rows.iter().flatten().any(|c| c.im != 0.0) { Field::Complex } else { Field::Real };
            SpaceDescriptor::lp(rows.len(), field, 2.0)?
        }
    };
    Operator::from_rows(space, &rows)
}

pub fn state_to_json(field: Field, s: &State) -> Value {
    json!({"x": coords_to_json(field, s.x().coords()), "xstar": coords_to_json(field, s.xstar().coords())})
}

pub fn state_from_json(v: &Value, space: &SpaceDescriptor) -> Result<State> {
    let x = Vector::new(coords_from_json(field_of(v, "x")?)?);
    let xs = Functional::new(coords_from_json(field_of(v, "xstar")?)?);
    State::new(space, x, xs)
}

pub fn compute_result_to_json(field: Field, r: &ComputeResult) -> Value {
    json!({
        "value": r.value,
        "certificate": state_to_json(field, &r.certificate),
        "witness_value": r.witness_value,
        "residual": r.residual,
        "attained": r.attained,
        "method": r.method.as_str(),
    })
}

pub fn repair_to_json(r: &RepairOutcome) -> Value {
    let field = r.s.space().field();
    let mut m = Map::new();
    m.insert("kind".into(), json!(r.kind.as_str()));
    m.insert("distance".into(), json!(r.distance));
    m.insert("S".into(), operator_to_json(&r.s));
    m.insert("certificate".into(), state_to_json(field, &r.certificate));
    m.insert("witness_value".into(), json!(r.certificate_value()));
    if let Some(z) = &r.zstar {
        m.insert("zstar".into(), coords_to_json(field, z.coords()));
    }
    Value::Object(m)
}

pub fn trace_to_json(t: &BpbTrace) -> Value {
    let field = t.s.space().field();
    let steps: Vec<Value> = t
        .steps
        .iter()
        .map(|s| {
            json!({
                "n": s.n,
                "lambda": [s.lambda.re, s.lambda.im],
                "c": s.c_estimate,
                "op_delta": s.op_delta,
                "dx": s.state_delta_x,
                "dxstar": s.state_delta_xstar,
            })
        })
        .collect();
    json!({
        "steps": steps,
        "S": operator_to_json(&t.s),
        "final_state": state_to_json(field, &t.final_state),
        "total_distance": t.total_distance,
        "final_gap": t.final_gap,
        "tail": t.tail,
    })
}

pub fn witness_report_to_json(r: &WitnessReport) -> Value {
    json!({"margins": r.margins, "all_satisfied": r.all_satisfied})
}

pub fn polytope_outcome_to_json(o: &PolytopeOutcome) -> Value {
    json!({
        "xstar": o.xstar.re(),
        "attain_point": o.attain_point.re(),
        "min_value": o.min_value,
        "case": match o.case {
            PolytopeCase::SignDefinite => "sign_definite",
            PolytopeCase::VertexZero => "vertex_zero",
            PolytopeCase::ContainsOrigin => "contains_origin",
            PolytopeCase::Constructed => "constructed",
        },
        "lambda": o.lambda,
    })
}

/// `{"vertices": [[...], ...], "functional": [...], "eps": r}`.
pub struct PolytopeInput {
    pub vertices: Vec<Vector>,
    pub functional: Functional,
    pub eps: Option<f64>,
}

pub fn polytope_input_from_json(v: &Value) -> Result<PolytopeInput> {
    let vertices = as_array(field_of(v, "vertices")?, "vertices")?
        .iter()
        .map(|p| coords_from_json(p).map(Vector::new))
        .collect::<Result<Vec<_>>>()?;
    let functional = Functional::new(coords_from_json(field_of(v, "functional")?)?);
    let eps = v.get("eps").map(|e| as_f64(e, "eps")).transpose()?;
    Ok(PolytopeInput { vertices, functional, eps })
}

/// `{"operator": ..., "states": [...], "deltas": [...], "epsilons": [...], "c": r}`.
pub struct WitnessInput {
    pub operator: Operator,
    pub states: Vec<State>,
    pub deltas: Vec<f64>,
    pub epsilons: Vec<f64>,
    pub c: f64,
}

pub fn witness_input_from_json(v: &Value, space: Option<&SpaceDescriptor>) -> Result<WitnessInput> {
    let operator = operator_from_json(field_of(v, "operator")?, space)?;
    let states = as_array(field_of(v, "states")?, "states")?
        .iter()
        .map(|s| state_from_json(s, operator.space()))
        .collect::<Result<Vec<_>>>()?;
    let reals = |key: &str| -> Result<Vec<f64>> {
        as_array(field_of(v, key)?, key)?.iter().map(|x| as_f64(x, key)).collect()
    };
    Ok(WitnessInput {
        deltas: reals("deltas")?,
        epsilons: reals("epsilons")?,
        c: as_f64(field_of(v, "c")?, "c")?,
        states,
        operator,
    })
}

/// `{"operator": ..., "start": {"x": [...], "xstar": [...]}, "eps": r}`.
pub struct BpbInput {
    pub operator: Operator,
    pub start: State,
    pub eps: Option<f64>,
}

pub fn bpb_input_from_json(v: &Value, space: Option<&SpaceDescriptor>) -> Result<BpbInput> {
    let operator = operator_from_json(field_of(v, "operator")?, space)?;
    let start = state_from_json(field_of(v, "start")?, operator.space())?;
    let eps = v.get("eps").map(|e| as_f64(e, "eps")).transpose()?;
    Ok(BpbInput { operator, start, eps })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn space_round_trip() {
        let v: Value = serde_json::from_str(r#"{"dim": 3, "field": "complex", "p": "inf", "weights": [1, "1/2", 3.5]}"#).unwrap();
        let s = space_from_json(&v).unwrap();
        assert!(s.exponent().is_infinite());
        assert_eq!(s.weights(), vec![1.0, 0.5, 3.5]);
        assert_eq!(space_from_json(&space_to_json(&s)).unwrap(), s);
    }

    #[test]
    fn operator_round_trip() {
        let v: Value = serde_json::from_str(
            r#"{"space": {"dim": 2, "field": "complex", "p": 1.5}, "matrix": [[1, [0, 1]], [0.5, -2]]}"#,
        )
        .unwrap();
        let t = operator_from_json(&v, None).unwrap();
        assert_eq!(t.matrix()[(0, 1)], C64::new(0.0, 1.0));
        assert_eq!(operator_from_json(&operator_to_json(&t), None).unwrap(), t);
    }

    #[test]
    fn missing_matrix_is_parse_error() {
        let v: Value = serde_json::from_str(r#"{"space": {"dim": 2, "p": 2}}"#).unwrap();
        assert!(matches!(operator_from_json(&v, None), Err(Error::Parse(_))));
    }

    #[test]
    fn default_space_is_l2() {
        let v: Value = serde_json::from_str(r#"{"matrix": [[0, 1], [1, 0]]}"#).unwrap();
        let t = operator_from_json(&v, None).unwrap();
        assert!(t.space().is_hilbert());
        assert_eq!(t.space().field(), Field::Real);
    }
}
