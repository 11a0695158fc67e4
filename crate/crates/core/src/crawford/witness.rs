use crate::error::{Error, Result};
use crate::oper::{apply, Operator};
use crate::space::State;

/// Margins below this count as violations.
const MARGIN_TOL: f64 = 1e-10;

/// Margins of the sequence inequality
/// `1 + delta_n |x*_{n+k}(T x_n)| <= |x*_{n+k}(x_n)| + delta_n c + eps_n`,
/// one per pair `(n, k)` with `n + k` inside the prefix, ordered by `n` then `k`.
#[derive(Clone, Debug, PartialEq)]
pub struct WitnessReport {
    pub margins: Vec<f64>,
    pub all_satisfied: bool,
}

impl WitnessReport {
    /// Index of the smallest margin as `(n, k)`, zero-based.
    pub fn worst(&self, len: usize) -> Option<((usize, usize), f64)> {
        let mut idx = 0;
        let mut out: Option<((usize, usize), f64)> = None;
        for n in 0..len {
            for k in 0..len - n {
                let m = *self.margins.get(idx)?;
                if out.is_none_or(|o| m < o.1) {
                    out = Some(((n, k), m));
                }
                idx += 1;
            }
        }
        out
    }
}

pub fn witness_check(
    t: &Operator,
    states: &[State],
    deltas: &[f64],
    epsilons: &[f64],
    c_value: f64,
) -> Result<WitnessReport> {
    let len = states.len();
    if deltas.len() != len || epsilons.len() != len {
        return Err(Error::LengthMismatch(format!(
            "{len} states, {} deltas, {} epsilons",
            deltas.len(),
            epsilons.len()
        )));
    }
    if len == 0 {
        return Err(Error::EmptyInput("witness check needs at least one state".into()));
    }
    if let Some(d) = deltas.iter().find(|d| !(**d > 0.0 && d.is_finite())) {
        return Err(Error::InvalidArgument(format!("deltas must be positive, got {d}")));
    }
    let space = t.space();
    let images = states
        .iter()
        .map(|s| {
            space.check_dim(s.x().dim())?;
            apply(t, s.x())
        })
        .collect::<Result<Vec<_>>>()?;

    let mut margins = Vec::with_capacity(len * (len + 1) / 2);
    for n in 0..len {
        let x = states[n].x();
        for later in &states[n..] {
            let xs = later.xstar();
            let lhs = 1.0 + deltas[n] * xs.eval(&images[n]).norm();
            let rhs = xs.eval(x).norm() + deltas[n] * c_value + epsilons[n];
            margins.push(rhs - lhs);
        }
    }
    let all_satisfied = margins.iter().all(|m| *m >= -MARGIN_TOL);
    Ok(WitnessReport { margins, all_satisfied })
}
