//! The batch commands. Each takes the input document as text and returns
//! the output document, so runs are pure functions of (input, flags).

use std::fmt::Write as _;
use std::str::FromStr;

use crawford_core::bpb::{bpb_refine, BpbConfig};
use crawford_core::json;
use crawford_core::repair::{
    compact_style_repair, exposing_repair, min_attain_polytope, repair_dispatch, zero_crawford_repair,
};
use crawford_core::{
    compute_with, default_tol, hilbert_sweep, witness_check, EngineOptions, Operator, Quantity, SpaceDescriptor,
    Strategy,
};
use serde_json::Value;

use crate::error::{CliError, CliResult};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RepairChoice {
    /// Zero repair when `c(T) < eps/2`, exposing repair otherwise.
    Auto,
    Zero,
    Compact,
    Exposing,
}

impl FromStr for RepairChoice {
    type Err = CliError;

    fn from_str(s: &str) -> CliResult<Self> {
        match s {
            "auto" => Ok(RepairChoice::Auto),
            "zero" => Ok(RepairChoice::Zero),
            "compact" | "compact_style" => Ok(RepairChoice::Compact),
            "exposing" => Ok(RepairChoice::Exposing),
            other => Err(CliError::Input(format!("unknown repair kind '{other}'"))),
        }
    }
}

pub fn parse_document(text: &str) -> CliResult<Value> {
    Ok(serde_json::from_str(text)?)
}

pub fn render(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("values serialize");
    s.push('\n');
    s
}

/// Space override from `--space`: a JSON space object (its `dim` may be
/// omitted) or the shorthand `[real:|complex:]p`, e.g. `3`, `inf`,
/// `complex:1.5`.
pub fn space_override(arg: Option<&str>, dim: usize) -> CliResult<Option<SpaceDescriptor>> {
    let Some(arg) = arg else { return Ok(None) };
    let arg = arg.trim();
    let mut v: Value = if arg.starts_with('{') {
        serde_json::from_str(arg)?
    } else {
        let (field, p) = match arg.split_once(':') {
            Some((f, p)) => (f, p),
            None => ("real", arg),
        };
        let p = match p.parse::<f64>() {
            Ok(x) if x.is_finite() => Value::from(x),
            _ => Value::from(p),
        };
        serde_json::json!({"field": field, "p": p})
    };
    if let Some(m) = v.as_object_mut() {
        m.entry("dim").or_insert(Value::from(dim));
    }
    Ok(Some(json::space_from_json(&v)?))
}

fn matrix_dim(op: &Value) -> CliResult<usize> {
    op.get("matrix")
        .and_then(Value::as_array)
        .map(Vec::len)
        .ok_or_else(|| CliError::Input("missing field \"matrix\"".into()))
}

fn operator_field(doc: &Value) -> CliResult<&Value> {
    doc.get("operator").ok_or_else(|| CliError::Input("missing field \"operator\"".into()))
}

pub fn load_operator(op: &Value, space_arg: Option<&str>) -> CliResult<Operator> {
    let space = space_override(space_arg, matrix_dim(op)?)?;
    Ok(json::operator_from_json(op, space.as_ref())?)
}

pub fn compute(text: &str, space: Option<&str>, q: Quantity, strategy: Strategy, tol: Option<f64>) -> CliResult<String> {
    let t = load_operator(&parse_document(text)?, space)?;
    let tol = tol.unwrap_or_else(|| default_tol(&t, strategy));
    let r = compute_with(&t, q, strategy, tol, &EngineOptions::default())?;
    let mut v = json::compute_result_to_json(t.space().field(), &r);
    v["quantity"] = Value::from(q.name());
    Ok(render(&v))
}

pub fn repair(text: &str, space: Option<&str>, eps: f64, seed: u64, kind: RepairChoice) -> CliResult<String> {
    let t = load_operator(&parse_document(text)?, space)?;
    let out = match kind {
        RepairChoice::Auto => repair_dispatch(&t, eps, seed)?,
        RepairChoice::Zero => zero_crawford_repair(&t, eps)?,
        RepairChoice::Compact => compact_style_repair(&t, eps)?,
        RepairChoice::Exposing => exposing_repair(&t, eps, seed)?,
    };
    Ok(render(&json::repair_to_json(&out)))
}

pub fn bpb(text: &str, space: Option<&str>, eps: Option<f64>) -> CliResult<String> {
    let doc = parse_document(text)?;
    let sp = space_override(space, matrix_dim(operator_field(&doc)?)?)?;
    let input = json::bpb_input_from_json(&doc, sp.as_ref())?;
    let eps = eps
        .or(input.eps)
        .ok_or_else(|| CliError::Input("eps must be given in the input or with --eps".into()))?;
    let trace = bpb_refine(&input.operator, &input.start, &BpbConfig::new(eps))?;
    Ok(render(&json::trace_to_json(&trace)))
}

/// Boundary of the field of values as CSV: a `# c=..., nu=...` comment,
/// a header row, then one row per sample angle.
pub fn range(text: &str, space: Option<&str>, samples: usize) -> CliResult<String> {
    let t = load_operator(&parse_document(text)?, space)?;
    let sw = hilbert_sweep(&t, samples)?;
    let mut out = String::new();
    writeln!(out, "# c={}, nu={}", sw.c, sw.nu).unwrap();
    writeln!(out, "theta,re,im,support").unwrap();
    for b in &sw.boundary {
        writeln!(out, "{},{},{},{}", b.theta, b.point.re, b.point.im, b.support).unwrap();
    }
    Ok(out)
}

pub fn witness(text: &str, space: Option<&str>) -> CliResult<String> {
    let doc = parse_document(text)?;
    let sp = space_override(space, matrix_dim(operator_field(&doc)?)?)?;
    let w = json::witness_input_from_json(&doc, sp.as_ref())?;
    let report = witness_check(&w.operator, &w.states, &w.deltas, &w.epsilons, w.c)?;
    Ok(render(&json::witness_report_to_json(&report)))
}

pub fn polytope(text: &str, eps: Option<f64>) -> CliResult<String> {
    let input = json::polytope_input_from_json(&parse_document(text)?)?;
    let eps = eps
        .or(input.eps)
        .ok_or_else(|| CliError::Input("eps must be given in the input or with --eps".into()))?;
    let out = min_attain_polytope(&input.vertices, &input.functional, eps)?;
    Ok(render(&json::polytope_outcome_to_json(&out)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shorthand_spaces() {
        let s = space_override(Some("complex:1.5"), 3).unwrap().unwrap();
        assert_eq!(s.dim(), 3);
        assert_eq!(s.exponent().value(), 1.5);
        let s = space_override(Some("inf"), 2).unwrap().unwrap();
        assert!(s.exponent().is_infinite());
        let s = space_override(Some(r#"{"p": 2, "weights": [1, 2]}"#), 2).unwrap().unwrap();
        assert!(s.is_weighted());
        assert!(space_override(None, 2).unwrap().is_none());
        assert!(matches!(space_override(Some("quaternion:2"), 2), Err(CliError::Input(_))));
    }

    #[test]
    fn repair_choice_names() {
        assert_eq!("compact".parse::<RepairChoice>().unwrap(), RepairChoice::Compact);
        assert!("other".parse::<RepairChoice>().is_err());
    }
}
