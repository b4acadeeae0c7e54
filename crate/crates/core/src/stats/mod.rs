//! Sequential tests and estimation over Bernoulli outcome streams.

mod compare;
mod estimate;
mod sprt;

pub use compare::{
    compare, compare_param, CompareParams, CompareResult, CompareVerdict, PairState, ParamCompareResult,
};
pub use estimate::{estimate, required_samples, EstimateParams, EstimateResult};
pub use sprt::{sprt, SprtParams, SprtResult, SprtVerdict};

use crate::error::{Error, Result};

/// Which hypothesis a Wald test accepted.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Decision {
    Null,
    Alt,
}

/// Wald's sequential probability ratio test between Bernoulli success
/// probabilities `null` and `alt`, in log-likelihood-ratio form.
#[derive(Clone, Debug, PartialEq)]
pub struct Wald {
    pub llr: f64,
    pub accept_null: f64,
    pub accept_alt: f64,
    on_success: f64,
    on_failure: f64,
}

impl Wald {
    pub fn new(null: f64, alt: f64, alpha: f64, beta: f64) -> Result<Wald> {
        for (name, v) in [("null", null), ("alt", alt), ("alpha", alpha), ("beta", beta)] {
            if !(v > 0.0 && v < 1.0) {
                return Err(Error::InvalidParameter(format!("{name} = {v} must lie in (0,1)")));
            }
        }
        if null == alt {
            return Err(Error::InvalidParameter("hypotheses must differ".into()));
        }
        Ok(Wald {
            llr: 0.0,
            accept_null: (beta / (1.0 - alpha)).ln(),
            accept_alt: ((1.0 - beta) / alpha).ln(),
            on_success: (alt / null).ln(),
            on_failure: ((1.0 - alt) / (1.0 - null)).ln(),
        })
    }

    pub fn push(&mut self, success: bool) -> Option<Decision> {
        self.llr += if success { self.on_success } else { self.on_failure };
        if self.llr >= self.accept_alt {
            Some(Decision::Alt)
        } else if self.llr <= self.accept_null {
            Some(Decision::Null)
        } else {
            None
        }
    }
}

pub(crate) fn check_unit(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{name} = {v} must lie in (0,1)")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn boundaries() {
        let w = Wald::new(0.6, 0.4, 0.05, 0.05).unwrap();
        assert!((w.accept_alt - 2.944_438_979).abs() < 1e-8);
        assert!((w.accept_null + 2.944_438_979).abs() < 1e-8);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(Wald::new(0.5, 0.5, 0.05, 0.05).is_err());
        assert!(Wald::new(0.6, 0.4, 0.0, 0.05).is_err());
        assert!(Wald::new(1.0, 0.4, 0.05, 0.05).is_err());
    }
}
