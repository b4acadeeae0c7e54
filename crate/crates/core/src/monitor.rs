//! Exact satisfaction of `<>_{C<=c} phi` and `[]_{C<=c} phi` on finite runs.
//!
//! Within a delay every clock is linear in the elapsed time, so each clock
//! atom changes truth value at most once. The truth of `phi` is constant
//! between consecutive change points, which makes a scan over the points and
//! the open pieces between them exact.

use serde::Serialize;

use crate::engine::{Run, RunEnd};
use crate::error::{Error, Result};
use crate::model::{ClockId, NetworkModel, NetworkState, Rel, TIME};
use crate::text::{Operator, PwctlQuery, StateProperty};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Outcome {
    pub satisfied: bool,
    /// Observer value at the first satisfying instant (diamond only).
    pub hit_cost: Option<f64>,
    /// Global time at the first satisfying instant (diamond only).
    pub hit_time: Option<f64>,
}

impl Outcome {
    pub const UNSATISFIED: Outcome = Outcome { satisfied: false, hit_cost: None, hit_time: None };
}

/// One delay of a run: state at its start, rates in force, and its length.
struct Segment<'a> {
    start: &'a NetworkState,
    rates: Vec<u32>,
    len: f64,
}

/// Truth of a clock atom at elapsed time `tau`.
fn clock_atom(s: &Segment, clock: ClockId, rel: Rel, n: f64, tau: f64) -> bool {
    let v = s.start.clocks.get(clock);
    let r = s.rates[clock.0];
    if r == 0 {
        rel.holds(v, n)
    } else {
        rel.holds(tau, crossing(v, r, n))
    }
}

fn crossing(v: f64, r: u32, n: f64) -> f64 {
    (n - v) / f64::from(r)
}

fn eval(phi: &StateProperty, s: &Segment, tau: f64) -> bool {
    match phi {
        StateProperty::True => true,
        StateProperty::False => false,
        StateProperty::At { comp, loc } => s.start.locations[*comp] == *loc,
        StateProperty::Clock { clock, rel, bound } => clock_atom(s, *clock, *rel, *bound as f64, tau),
        StateProperty::Int { var, rel, value } => rel.holds(s.start.ints[var.0], *value),
        StateProperty::Not(p) => !eval(p, s, tau),
        StateProperty::And(a, b) => eval(a, s, tau) && eval(b, s, tau),
        StateProperty::Or(a, b) => eval(a, s, tau) || eval(b, s, tau),
    }
}

fn change_points(phi: &StateProperty, s: &Segment, out: &mut Vec<f64>) {
    match phi {
        StateProperty::Clock { clock, bound, .. } => {
            let r = s.rates[clock.0];
            if r > 0 {
                let t = crossing(s.start.clocks.get(*clock), r, *bound as f64);
                if t > 0.0 && t < s.len {
                    out.push(t);
                }
            }
        }
        StateProperty::Not(p) => change_points(p, s, out),
        StateProperty::And(a, b) | StateProperty::Or(a, b) => {
            change_points(a, s, out);
            change_points(b, s, out);
        }
        _ => {}
    }
}

/// Infimum of the elapsed times in `[0, len]` where `phi` holds.
fn first_hit(phi: &StateProperty, s: &Segment) -> Option<f64> {
    let mut pts = Vec::new();
    change_points(phi, s, &mut pts);
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    let mut prev = 0.0;
    if eval(phi, s, 0.0) {
        return Some(0.0);
    }
    for &t in &pts {
        if eval(phi, s, prev + (t - prev) / 2.0) {
            return Some(prev);
        }
        if eval(phi, s, t) {
            return Some(t);
        }
        prev = t;
    }
    if s.len > prev {
        let mid = if s.len.is_finite() { prev + (s.len - prev) / 2.0 } else { prev + 1.0 };
        if eval(phi, s, mid) {
            return Some(prev);
        }
        if s.len.is_finite() && eval(phi, s, s.len) {
            return Some(s.len);
        }
    }
    None
}

fn check_run(model: &NetworkModel, run: &Run, observer: ClockId, c: f64) -> Result<()> {
    if run.observer != observer || c > run.bound {
        return Err(Error::ObserverMismatch {
            run: model.clocks[run.observer.0].name.clone(),
            run_bound: run.bound,
            query: model.clocks.get(observer.0).map_or_else(|| format!("#{}", observer.0), |d| d.name.clone()),
            query_bound: c,
        });
    }
    Ok(())
}

/// First instant along `run` where `phi` holds while the observer is `<= c`.
pub fn check_diamond(
    model: &NetworkModel,
    run: &Run,
    phi: &StateProperty,
    observer: ClockId,
    c: f64,
) -> Result<Outcome> {
    check_run(model, run, observer, c)?;
    let tail_len = match run.end {
        RunEnd::Blocked => f64::INFINITY,
        RunEnd::Bound => 0.0,
    };
    let segments =
        run.segments().map(|(start, step)| (start, step.delay)).chain(std::iter::once((run.last_state(), tail_len)));
    for (start, len) in segments {
        let seg = Segment { start, rates: model.rates(&start.locations).0, len };
        let Some(tau) = first_hit_bounded(phi, &seg, observer, c) else {
            continue;
        };
        let at = |clock: ClockId| start.clocks.get(clock) + f64::from(seg.rates[clock.0]) * tau;
        return Ok(Outcome { satisfied: true, hit_cost: Some(at(observer)), hit_time: Some(at(TIME)) });
    }
    Ok(Outcome::UNSATISFIED)
}

/// `first_hit` restricted to the part of the segment where the observer is `<= c`.
fn first_hit_bounded(phi: &StateProperty, seg: &Segment, observer: ClockId, c: f64) -> Option<f64> {
    let v = seg.start.clocks.get(observer);
    let r = seg.rates[observer.0];
    let limit = if r == 0 {
        if v <= c {
            seg.len
        } else {
            return None;
        }
    } else {
        let t = crossing(v, r, c);
        if t < 0.0 {
            return None;
        }
        t.min(seg.len)
    };
    let clipped = Segment { start: seg.start, rates: seg.rates.clone(), len: limit };
    first_hit(phi, &clipped)
}

/// Elapsed time until `phi` first holds when letting time pass from `state`
/// forever, observer `<= c`.
pub(crate) fn first_hit_from(
    model: &NetworkModel,
    phi: &StateProperty,
    state: &NetworkState,
    observer: ClockId,
    c: f64,
) -> Option<f64> {
    let seg = Segment { start: state, rates: model.rates(&state.locations).0, len: f64::INFINITY };
    first_hit_bounded(phi, &seg, observer, c)
}

/// `[]_{C<=c} phi` holds exactly when `<>_{C<=c} !phi` does not.
pub fn check_box(model: &NetworkModel, run: &Run, phi: &StateProperty, observer: ClockId, c: f64) -> Result<Outcome> {
    let neg = check_diamond(model, run, &phi.clone().not(), observer, c)?;
    Ok(Outcome { satisfied: !neg.satisfied, hit_cost: None, hit_time: None })
}

pub fn check(model: &NetworkModel, run: &Run, q: &PwctlQuery) -> Result<Outcome> {
    match q.operator {
        Operator::Diamond => check_diamond(model, run, &q.phi, q.observer, q.bound),
        Operator::Box => check_box(model, run, &q.phi, q.observer, q.bound),
    }
}
