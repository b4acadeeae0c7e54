//! Numerical ground truth for small networks.
//!
//! The probability of `<>_{C<=c} phi` from a state is the sum, over every
//! component that may win the next race, of the integral of its delay
//! density times the survival of all other delays times the expected value
//! of the successor, plus the mass of the event "nothing fires before phi
//! becomes true". Successors are expanded recursively up to a depth bound.

use serde::Serialize;

use crate::engine::{delay_distribution, fire, DelayDistribution, OutputChoice};
use crate::error::{Error, Result};
use crate::model::{advance, enabled_outputs_with, ClockId, LocId, NetworkModel, NetworkState, EMISSION_SLACK};
use crate::monitor::first_hit_from;
use crate::quad::piecewise;
use crate::text::{Operator, PwctlQuery, StateProperty};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct OracleResult {
    pub probability: f64,
    pub error_bound: f64,
}

/// Delay law of one component in the current state.
#[derive(Clone, Copy, Debug)]
enum Law {
    Uniform { lo: f64, hi: f64 },
    Exp { shift: f64, rate: f64 },
    Point(f64),
    Never,
}

impl Law {
    fn of(d: DelayDistribution) -> Law {
        match d {
            DelayDistribution::Uniform { lo, hi } if lo == hi => Law::Point(lo),
            DelayDistribution::Uniform { lo, hi } => Law::Uniform { lo, hi },
            DelayDistribution::Exponential { shift, rate } => Law::Exp { shift, rate },
            DelayDistribution::Blocked => Law::Never,
        }
    }

    /// `P(d > t)`.
    fn survival(self, t: f64) -> f64 {
        match self {
            Law::Uniform { lo, hi } => ((hi - t) / (hi - lo)).clamp(0.0, 1.0),
            Law::Exp { shift, rate } => {
                if t <= shift {
                    1.0
                } else {
                    (-rate * (t - shift)).exp()
                }
            }
            Law::Point(p) => f64::from(u8::from(p > t)),
            Law::Never => 1.0,
        }
    }

    /// `P(d >= t)`.
    fn survival_incl(self, t: f64) -> f64 {
        match self {
            Law::Point(p) => f64::from(u8::from(p >= t)),
            other => other.survival(t),
        }
    }

    fn density(self, t: f64) -> f64 {
        match self {
            Law::Uniform { lo, hi } if t >= lo && t <= hi => 1.0 / (hi - lo),
            Law::Exp { shift, rate } if t >= shift => rate * (-rate * (t - shift)).exp(),
            _ => 0.0,
        }
    }

    fn support_end(self) -> f64 {
        match self {
            Law::Uniform { hi, .. } => hi,
            Law::Point(p) => p,
            Law::Exp { .. } | Law::Never => f64::INFINITY,
        }
    }
}

struct Oracle<'a> {
    model: &'a NetworkModel,
    phi: &'a StateProperty,
    observer: ClockId,
    bound: f64,
    max_depth: usize,
    /// `(clock, constant)` pairs whose crossings are integration breakpoints.
    thresholds: Vec<(ClockId, f64)>,
    path: Vec<(Vec<LocId>, Vec<i64>)>,
}

/// Probability of `query` (diamond or box) to absolute tolerance `tol`,
/// expanding at most `max_depth` events.
pub fn exact_probability(model: &NetworkModel, query: &PwctlQuery, tol: f64, max_depth: usize) -> Result<OracleResult> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::InvalidParameter(format!("tolerance {tol} must be positive")));
    }
    let phi = match query.operator {
        Operator::Diamond => query.phi.clone(),
        Operator::Box => query.phi.clone().not(),
    };
    let mut o = Oracle {
        model,
        phi: &phi,
        observer: query.observer,
        bound: query.bound,
        max_depth,
        thresholds: thresholds(model, &phi),
        path: Vec::new(),
    };
    let (p, err) = o.value(&model.initial_state(), 0, tol)?;
    let p = p.clamp(0.0, 1.0);
    Ok(OracleResult {
        probability: match query.operator {
            Operator::Diamond => p,
            Operator::Box => 1.0 - p,
        },
        error_bound: err,
    })
}

fn thresholds(model: &NetworkModel, phi: &StateProperty) -> Vec<(ClockId, f64)> {
    let mut out = Vec::new();
    for c in &model.components {
        for l in &c.locations {
            out.extend(l.invariant.clock_atoms().map(|(x, _, n)| (x, n as f64)));
        }
        for e in &c.edges {
            out.extend(e.guard.clock_atoms().map(|(x, _, n)| (x, n as f64)));
        }
    }
    fn walk(p: &StateProperty, out: &mut Vec<(ClockId, f64)>) {
        match p {
            StateProperty::Clock { clock, bound, .. } => out.push((*clock, *bound as f64)),
            StateProperty::Not(q) => walk(q, out),
            StateProperty::And(a, b) | StateProperty::Or(a, b) => {
                walk(a, out);
                walk(b, out);
            }
            _ => {}
        }
    }
    walk(phi, &mut out);
    out.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)));
    out.dedup();
    out
}

impl Oracle<'_> {
    /// `(probability, error bound)` of reaching `phi` from `s`.
    fn value(&mut self, s: &NetworkState, depth: usize, tol: f64) -> Result<(f64, f64)> {
        let hit = first_hit_from(self.model, self.phi, s, self.observer, self.bound);
        if hit == Some(0.0) {
            return Ok((1.0, 0.0));
        }
        let key = (s.locations.clone(), s.ints.clone());
        if self.path.contains(&key) {
            return Err(Error::UnsupportedStructure(
                "the network revisits a discrete configuration within the depth bound".into(),
            ));
        }
        let rates = self.model.rates(&s.locations);
        let rc = f64::from(rates.get(self.observer));
        let tc = if rc == 0.0 { f64::INFINITY } else { (self.bound - s.clocks.get(self.observer)) / rc };
        let horizon = hit.unwrap_or(tc).min(tc);
        let laws: Vec<Law> =
            (0..self.model.components.len()).map(|j| Law::of(delay_distribution(self.model, s, j))).collect();
        if laws.iter().all(|l| matches!(l, Law::Never)) {
            let p = if hit.is_some() { 1.0 } else { 0.0 };
            return Ok((p, 0.0));
        }
        if depth >= self.max_depth {
            return Err(Error::DepthExceeded(self.max_depth));
        }

        // Upper integration limit and exponential tail cut.
        let mut upper = laws.iter().map(|l| l.support_end()).fold(horizon, f64::min);
        let mut truncated = 0.0;
        if upper.is_infinite() {
            let total_rate: f64 = laws.iter().map(|l| if let Law::Exp { rate, .. } = l { *rate } else { 0.0 }).sum();
            let start =
                laws.iter().map(|l| if let Law::Exp { shift, .. } = l { *shift } else { 0.0 }).fold(0.0, f64::max);
            upper = start + (10.0 / tol).ln() / total_rate;
            truncated = laws.iter().map(|l| l.survival(upper)).product::<f64>();
        }

        let mut breaks = Vec::new();
        for l in &laws {
            match *l {
                Law::Uniform { lo, hi } => breaks.extend([lo, hi]),
                Law::Exp { shift, .. } => breaks.push(shift),
                Law::Point(p) => breaks.push(p),
                Law::Never => {}
            }
        }
        for &(x, n) in &self.thresholds {
            let r = rates.get(x);
            if r > 0 {
                breaks.push((n - s.clocks.get(x)) / f64::from(r));
            }
        }

        self.path.push(key);
        let child_tol = tol / 2.0;
        let mut child_err: f64 = 0.0;
        let result = (|| -> Result<(f64, f64)> {
            let mut integrand = |t: f64| -> Result<f64> {
                let mut sum = 0.0;
                for (c, law) in laws.iter().enumerate() {
                    let f = law.density(t);
                    if f == 0.0 {
                        continue;
                    }
                    let others: f64 =
                        laws.iter().enumerate().filter(|&(j, _)| j != c).map(|(_, l)| l.survival(t)).product();
                    if others == 0.0 {
                        continue;
                    }
                    let (g, e) = self.after_event(s, &rates, c, t, depth, child_tol)?;
                    child_err = child_err.max(e);
                    sum += f * others * g;
                }
                Ok(sum)
            };
            let (mut total, quad_err) = piecewise(&mut integrand, 0.0, upper, &breaks, tol / 2.0)?;

            // Point masses strictly before the horizon, ties shared equally.
            let mut points: Vec<f64> = laws
                .iter()
                .filter_map(|l| if let Law::Point(p) = l { Some(*p) } else { None })
                .filter(|&p| p < horizon)
                .collect();
            points.sort_by(f64::total_cmp);
            points.dedup();
            for p in points {
                let tied: Vec<usize> =
                    (0..laws.len()).filter(|&j| matches!(laws[j], Law::Point(q) if q == p)).collect();
                let others: f64 =
                    laws.iter().enumerate().filter(|(j, _)| !tied.contains(j)).map(|(_, l)| l.survival(p)).product();
                if others == 0.0 {
                    continue;
                }
                for &c in &tied {
                    let (g, e) = self.after_event(s, &rates, c, p, depth, child_tol)?;
                    child_err = child_err.max(e);
                    total += others * g / tied.len() as f64;
                }
            }

            if let Some(h) = hit {
                if h <= tc {
                    total += laws.iter().map(|l| l.survival_incl(h)).product::<f64>();
                }
            }
            Ok((total, quad_err + truncated + child_err))
        })();
        self.path.pop();
        result
    }

    /// Expected value after component `c` fires at elapsed time `t`.
    fn after_event(
        &mut self,
        s: &NetworkState,
        rates: &crate::model::RateVector,
        c: usize,
        t: f64,
        depth: usize,
        tol: f64,
    ) -> Result<(f64, f64)> {
        let mut pre = s.clone();
        pre.clocks = advance(&s.clocks, rates, t);
        let enabled = enabled_outputs_with(self.model, &pre, c, EMISSION_SLACK)?;
        if enabled.is_empty() {
            return Err(Error::NoEnabledOutput(self.model.components[c].name.clone()));
        }
        let pa = 1.0 / enabled.len() as f64;
        let (mut v, mut err) = (0.0, 0.0f64);
        for &(action, edge) in &enabled {
            let branches = &self.model.components[c].edges[edge].branches;
            let total: f64 = branches.iter().map(|b| f64::from(b.weight)).sum();
            for (bi, b) in branches.iter().enumerate() {
                let succ = fire(self.model, &pre, c, OutputChoice { action, edge, branch: bi })?;
                let (x, e) = self.value(&succ, depth + 1, tol)?;
                let w = pa * f64::from(b.weight) / total;
                v += w * x;
                err = err.max(e);
            }
        }
        Ok((v, err))
    }
}
