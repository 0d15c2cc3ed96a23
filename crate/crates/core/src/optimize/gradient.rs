use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::autodiff::{Tape, Var};
use crate::error::{Error, Result};
use crate::exec::ExecMode;
use crate::geometry::Real;

/// A scalar function of a flat parameter vector, evaluable in any [`Real`].
pub trait Objective: Sync {
    fn evaluate<S: Real>(&self, params: &[S]) -> Result<S>;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GradientMode {
    FiniteDifference,
    /// Reverse-mode differentiation of the same code path.
    #[default]
    Provided,
}

impl FromStr for GradientMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "finite_difference" => Ok(Self::FiniteDifference),
            "provided" => Ok(Self::Provided),
            other => Err(Error::InvalidConfig(format!("unknown gradient mode `{other}`"))),
        }
    }
}

impl fmt::Display for GradientMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::FiniteDifference => "finite_difference",
            Self::Provided => "provided",
        })
    }
}

fn finite(v: f64) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::NonFiniteObjective(v))
    }
}

/// Central differences `(f(p + εe_i) − f(p − εe_i)) / 2ε`, one coordinate per task.
pub fn finite_difference_gradient<O: Objective>(objective: &O, params: &[f64], eps: f64, exec: ExecMode) -> Result<Vec<f64>> {
    let parts = exec.map_range(params.len(), |i| {
        let mut p = params.to_vec();
        p[i] = params[i] + eps;
        let hi = finite(objective.evaluate(&p)?)?;
        p[i] = params[i] - eps;
        let lo = finite(objective.evaluate(&p)?)?;
        Ok((hi - lo) / (2.0 * eps))
    });
    parts.into_iter().collect()
}

/// Runs `f` on tape variables for `params` and back-propagates its scalar
/// output. `f` may also return a side value computed alongside.
pub fn reverse_mode<T, F>(params: &[f64], f: F) -> Result<(f64, Vec<f64>, T)>
where
    F: for<'t> FnOnce(&'t Tape, &[Var<'t>]) -> Result<(Var<'t>, T)>,
{
    reverse_mode_on(&mut Tape::new(), params, f)
}

/// [`reverse_mode`] on a caller-owned tape, which is cleared first; reusing
/// one tape across calls avoids reallocating it.
pub fn reverse_mode_on<T, F>(tape: &mut Tape, params: &[f64], f: F) -> Result<(f64, Vec<f64>, T)>
where
    F: for<'t> FnOnce(&'t Tape, &[Var<'t>]) -> Result<(Var<'t>, T)>,
{
    tape.reset();
    let tape = &*tape;
    let vars = tape.vars(params);
    let (out, side) = f(tape, &vars)?;
    let value = finite(out.value())?;
    let grad = tape.gradient(out, &vars);
    if let Some(g) = grad.iter().find(|g| !g.is_finite()) {
        return Err(Error::NonFiniteObjective(*g));
    }
    Ok((value, grad, side))
}

pub fn provided_gradient<O: Objective>(objective: &O, params: &[f64]) -> Result<(f64, Vec<f64>)> {
    let (v, g, ()) = reverse_mode(params, |_, vars| Ok((objective.evaluate(vars)?, ())))?;
    Ok((v, g))
}

/// Gradient of `objective` at `params` using `mode`.
pub fn gradient<O: Objective>(objective: &O, params: &[f64], mode: GradientMode, fd_epsilon: f64, exec: ExecMode) -> Result<Vec<f64>> {
    match mode {
        GradientMode::FiniteDifference => {
            finite(objective.evaluate(params)?)?;
            finite_difference_gradient(objective, params, fd_epsilon, exec)
        }
        GradientMode::Provided => provided_gradient(objective, params).map(|(_, g)| g),
    }
}
