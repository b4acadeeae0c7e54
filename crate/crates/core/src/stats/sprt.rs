use serde::Serialize;

use super::{check_unit, Decision, Wald};
use crate::error::{Error, Result};

/// Test of `H0: p >= theta + delta0` against `H1: p <= theta - delta1`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SprtParams {
    pub theta: f64,
    pub delta0: f64,
    pub delta1: f64,
    pub alpha: f64,
    pub beta: f64,
    pub max_samples: u64,
}

impl SprtParams {
    pub fn new(theta: f64, delta0: f64, delta1: f64, alpha: f64, beta: f64) -> Self {
        SprtParams { theta, delta0, delta1, alpha, beta, max_samples: 10_000_000 }
    }

    pub fn p0(&self) -> f64 {
        self.theta + self.delta0
    }

    pub fn p1(&self) -> f64 {
        self.theta - self.delta1
    }

    pub fn validate(&self) -> Result<()> {
        let (p0, p1) = (self.p0(), self.p1());
        if !(0.0 < p1 && p1 < p0 && p0 < 1.0) {
            return Err(Error::InvalidParameter(format!("need 0 < p1 < p0 < 1, got p1 = {p1}, p0 = {p0}")));
        }
        check_unit("alpha", self.alpha)?;
        check_unit("beta", self.beta)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum SprtVerdict {
    H0,
    H1,
    Undecided,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SprtResult {
    pub verdict: SprtVerdict,
    pub samples: u64,
    pub successes: u64,
    pub llr: f64,
}

/// Consumes outcomes until a hypothesis is accepted, the sample cap is hit,
/// or the source ends (both of the latter give `Undecided`).
pub fn sprt<I>(source: I, params: &SprtParams) -> Result<SprtResult>
where
    I: IntoIterator<Item = Result<bool>>,
{
    params.validate()?;
    let mut w = Wald::new(params.p0(), params.p1(), params.alpha, params.beta)?;
    let (mut samples, mut successes) = (0, 0);
    let mut verdict = SprtVerdict::Undecided;
    for x in source {
        if samples >= params.max_samples {
            break;
        }
        let x = x?;
        samples += 1;
        successes += u64::from(x);
        match w.push(x) {
            Some(Decision::Null) => {
                verdict = SprtVerdict::H0;
                break;
            }
            Some(Decision::Alt) => {
                verdict = SprtVerdict::H1;
                break;
            }
            None => {}
        }
    }
    Ok(SprtResult { verdict, samples, successes, llr: w.llr })
}
