use serde::Serialize;

use super::{check_unit, Decision, Wald};
use crate::error::{Error, Result};
use crate::monitor::Outcome;

/// Comparison of two success probabilities through the odds ratio
/// `u = p2 (1 - p1) / (p1 (1 - p2))`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CompareParams {
    pub u0: f64,
    pub u1: f64,
    pub alpha: f64,
    pub beta: f64,
    /// Equality precheck: `P(x1 = x2) >= p0eq` against `<= p1eq`.
    pub p0eq: f64,
    pub p1eq: f64,
    pub max_pairs: u64,
}

impl CompareParams {
    pub fn new(u0: f64, u1: f64, alpha: f64, beta: f64, p0eq: f64, p1eq: f64) -> Self {
        CompareParams { u0, u1, alpha, beta, p0eq, p1eq, max_pairs: 10_000_000 }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0 < self.u0 && self.u0 < self.u1 && self.u1.is_finite()) {
            return Err(Error::InvalidParameter(format!("need 0 < u0 < u1, got u0 = {}, u1 = {}", self.u0, self.u1)));
        }
        if !(0.0 < self.p1eq && self.p1eq < self.p0eq && self.p0eq < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "need 0 < p1eq < p0eq < 1, got p1eq = {}, p0eq = {}",
                self.p1eq, self.p0eq
            )));
        }
        check_unit("alpha", self.alpha)?;
        check_unit("beta", self.beta)
    }

    /// `(a, r, c)`: after `n` informative pairs with `t` wins of process 2,
    /// process 2 is accepted when `t >= r + n c` and rejected when `t <= a + n c`.
    pub fn count_bounds(&self) -> (f64, f64, f64) {
        let span = self.u1.ln() - self.u0.ln();
        (
            (self.beta / (1.0 - self.alpha)).ln() / span,
            ((1.0 - self.beta) / self.alpha).ln() / span,
            ((1.0 + self.u1) / (1.0 + self.u0)).ln() / span,
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum CompareVerdict {
    Process1Superior,
    Process2Superior,
    Indifferent,
    Undecided,
}

impl CompareVerdict {
    /// `1` when process 2 is accepted, `0` when rejected, `0.5` when indifferent.
    pub fn score(self) -> Option<f64> {
        match self {
            CompareVerdict::Process2Superior => Some(1.0),
            CompareVerdict::Process1Superior => Some(0.0),
            CompareVerdict::Indifferent => Some(0.5),
            CompareVerdict::Undecided => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CompareResult {
    pub verdict: CompareVerdict,
    pub informative: u64,
    pub total: u64,
    /// Informative pairs won by process 2.
    pub wins2: u64,
}

/// Decision state of one comparison: the equality precheck (until it
/// rejects) and the test on informative pairs, fed the same pairs.
#[derive(Clone, Debug, PartialEq)]
pub struct PairState {
    precheck: Option<Wald>,
    main: Wald,
    pub informative: u64,
    pub total: u64,
    pub wins2: u64,
    pub verdict: Option<CompareVerdict>,
}

impl PairState {
    pub fn new(p: &CompareParams) -> Result<PairState> {
        p.validate()?;
        let w = |u: f64| u / (1.0 + u);
        Ok(PairState {
            precheck: Some(Wald::new(p.p0eq, p.p1eq, p.alpha, p.beta)?),
            main: Wald::new(w(p.u0), w(p.u1), p.alpha, p.beta)?,
            informative: 0,
            total: 0,
            wins2: 0,
            verdict: None,
        })
    }

    pub fn push(&mut self, x1: bool, x2: bool) -> Option<CompareVerdict> {
        if self.verdict.is_some() {
            return self.verdict;
        }
        self.total += 1;
        if let Some(pre) = &mut self.precheck {
            match pre.push(x1 == x2) {
                Some(Decision::Null) => {
                    self.verdict = Some(CompareVerdict::Indifferent);
                    return self.verdict;
                }
                Some(Decision::Alt) => self.precheck = None,
                None => {}
            }
        }
        if x1 != x2 {
            self.informative += 1;
            self.wins2 += u64::from(x2);
            self.verdict = match self.main.push(x2) {
                Some(Decision::Alt) => Some(CompareVerdict::Process2Superior),
                Some(Decision::Null) => Some(CompareVerdict::Process1Superior),
                None => None,
            };
        }
        self.verdict
    }

    pub fn llr(&self) -> f64 {
        self.main.llr
    }

    fn result(&self) -> CompareResult {
        CompareResult {
            verdict: self.verdict.unwrap_or(CompareVerdict::Undecided),
            informative: self.informative,
            total: self.total,
            wins2: self.wins2,
        }
    }
}

/// Sequential comparison over pairs `(x1, x2)` from independent runs.
pub fn compare<I>(source: I, params: &CompareParams) -> Result<CompareResult>
where
    I: IntoIterator<Item = Result<(bool, bool)>>,
{
    let mut st = PairState::new(params)?;
    for pair in source {
        if st.total >= params.max_pairs {
            break;
        }
        let (x1, x2) = pair?;
        if st.push(x1, x2).is_some() {
            break;
        }
    }
    Ok(st.result())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ParamCompareResult {
    pub bounds: Vec<f64>,
    pub verdicts: Vec<CompareVerdict>,
    /// Pairs fed to each index before it was decided.
    pub pairs: Vec<u64>,
    pub total_pairs: u64,
}

impl ParamCompareResult {
    pub fn scores(&self) -> Vec<Option<f64>> {
        self.verdicts.iter().map(|v| v.score()).collect()
    }
}

/// Runs one comparison per bound `i c / n` (`i = 1..=n`) on the same pairs of
/// outcomes; a run satisfies index `i` when it hit the target at cost `<= i c / n`.
pub fn compare_param<I>(source: I, c: f64, n: usize, params: &CompareParams) -> Result<ParamCompareResult>
where
    I: IntoIterator<Item = Result<(Outcome, Outcome)>>,
{
    if n == 0 {
        return Err(Error::InvalidParameter("N must be at least 1".into()));
    }
    let bounds: Vec<f64> = (1..=n).map(|i| i as f64 * c / n as f64).collect();
    let mut states = vec![PairState::new(params)?; n];
    let mut open = n;
    let mut total = 0;
    let within = |o: &Outcome, b: f64| o.satisfied && o.hit_cost.is_some_and(|h| h <= b);
    for pair in source {
        if open == 0 || total >= params.max_pairs {
            break;
        }
        let (o1, o2) = pair?;
        total += 1;
        for (st, &b) in states.iter_mut().zip(&bounds) {
            if st.verdict.is_none() && st.push(within(&o1, b), within(&o2, b)).is_some() {
                open -= 1;
            }
        }
    }
    Ok(ParamCompareResult {
        verdicts: states.iter().map(|s| s.result().verdict).collect(),
        pairs: states.iter().map(|s| s.total).collect(),
        bounds,
        total_pairs: total,
    })
}
