use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EstimateParams {
    pub delta: f64,
    pub epsilon: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EstimateResult {
    pub p_hat: f64,
    pub samples: u64,
    pub successes: u64,
    pub lo: f64,
    pub hi: f64,
}

/// `ceil(4 ln(1/delta) / epsilon^2)`, the Chernoff-Hoeffding sample size.
pub fn required_samples(params: &EstimateParams) -> Result<u64> {
    let EstimateParams { delta, epsilon } = *params;
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(Error::InvalidParameter(format!("delta = {delta} must lie in (0,1]")));
    }
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::InvalidParameter(format!("epsilon = {epsilon} must lie in (0,1)")));
    }
    Ok((4.0 * (1.0 / delta).ln() / (epsilon * epsilon)).ceil() as u64)
}

/// Success fraction over exactly `required_samples` outcomes.
pub fn estimate<I>(source: I, params: &EstimateParams) -> Result<EstimateResult>
where
    I: IntoIterator<Item = Result<bool>>,
{
    let n = required_samples(params)?;
    if n == 0 {
        return Err(Error::InvalidParameter("delta = 1 demands no samples".into()));
    }
    let mut it = source.into_iter();
    let mut successes = 0;
    for i in 0..n {
        match it.next() {
            Some(x) => successes += u64::from(x?),
            None => return Err(Error::SourceExhausted(i)),
        }
    }
    let p_hat = successes as f64 / n as f64;
    Ok(EstimateResult {
        p_hat,
        samples: n,
        successes,
        lo: (p_hat - params.epsilon).max(0.0),
        hi: (p_hat + params.epsilon).min(1.0),
    })
}
