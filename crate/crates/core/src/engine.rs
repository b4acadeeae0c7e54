//! Stochastic race semantics and random run generation.
//!
//! Every step, each component draws a delay from its delay distribution; the
//! smallest delay wins, the winner emits one of its enabled outputs and every
//! other component reacts on the matching input edge (or stutters).

use rand::Rng;
use rand_distr::{Distribution, Exp};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{
    advance, clock_atom_holds, enabled_outputs_with, guard_holds, ActionId, ClockId, LocId, NetworkModel, NetworkState,
    EMISSION_SLACK,
};
use crate::text::doc::Direction;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum DelayDistribution {
    Uniform { lo: f64, hi: f64 },
    Exponential { shift: f64, rate: f64 },
    Blocked,
}

/// Earliest delay after which clock atom `v rel n` holds, `v` growing at `rate`.
fn earliest(v: f64, rate: u32, n: i64) -> f64 {
    let n = n as f64;
    if v >= n {
        0.0
    } else if rate == 0 {
        f64::INFINITY
    } else {
        (n - v) / f64::from(rate)
    }
}

/// Latest delay for which `v <= n` keeps holding.
fn latest(v: f64, rate: u32, n: i64) -> f64 {
    let n = n as f64;
    if rate == 0 {
        f64::INFINITY
    } else {
        ((n - v) / f64::from(rate)).max(0.0)
    }
}

/// `(d, D)`: earliest enabling delay of any output edge and supremum delay
/// allowed by the invariant of component `comp`.
pub fn delay_window(model: &NetworkModel, state: &NetworkState, comp: usize) -> (f64, f64) {
    let c = &model.components[comp];
    let loc = state.locations[comp];
    let rate = |clock: ClockId| c.rate_of(loc, clock).unwrap_or(1);
    let mut d = f64::INFINITY;
    for (_, e) in c.out_edges(loc) {
        if !e.guard.int_atoms_hold(&state.ints) {
            continue;
        }
        let t = e.guard.clock_atoms().map(|(x, _, n)| earliest(state.clocks.get(x), rate(x), n)).fold(0.0, f64::max);
        d = d.min(t);
    }
    let big_d = c.locations[loc.0]
        .invariant
        .clock_atoms()
        .map(|(x, _, n)| latest(state.clocks.get(x), rate(x), n))
        .fold(f64::INFINITY, f64::min);
    (d, big_d)
}

pub fn delay_distribution(model: &NetworkModel, state: &NetworkState, comp: usize) -> DelayDistribution {
    let (d, big_d) = delay_window(model, state, comp);
    if d.is_infinite() {
        return DelayDistribution::Blocked;
    }
    if big_d.is_finite() {
        let tol = 1e-12 * big_d.max(1.0);
        return if d <= big_d + tol {
            DelayDistribution::Uniform { lo: d.min(big_d), hi: big_d }
        } else {
            DelayDistribution::Blocked
        };
    }
    let loc = state.locations[comp];
    match model.components[comp].locations[loc.0].exp_rate {
        Some(r) => DelayDistribution::Exponential { shift: d, rate: r.value() },
        None => DelayDistribution::Blocked,
    }
}

pub fn sample_delay<R: Rng + ?Sized>(dist: &DelayDistribution, rng: &mut R) -> f64 {
    match *dist {
        DelayDistribution::Uniform { lo, hi } if lo == hi => lo,
        DelayDistribution::Uniform { lo, hi } => lo + (hi - lo) * rng.random::<f64>(),
        DelayDistribution::Exponential { shift, rate } => shift + Exp::new(rate).expect("positive rate").sample(rng),
        DelayDistribution::Blocked => f64::INFINITY,
    }
}

/// Chosen output: action, edge index within the component, branch index.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OutputChoice {
    pub action: ActionId,
    pub edge: usize,
    pub branch: usize,
}

pub fn sample_output<R: Rng + ?Sized>(
    model: &NetworkModel,
    state: &NetworkState,
    comp: usize,
    rng: &mut R,
) -> Result<OutputChoice> {
    let enabled = enabled_outputs_with(model, state, comp, EMISSION_SLACK)?;
    if enabled.is_empty() {
        return Err(Error::NoEnabledOutput(model.components[comp].name.clone()));
    }
    let (action, edge) = enabled[rng.random_range(0..enabled.len())];
    let branches = &model.components[comp].edges[edge].branches;
    let branch = if branches.len() == 1 {
        0
    } else {
        let total: u64 = branches.iter().map(|b| u64::from(b.weight)).sum();
        let mut k = rng.random_range(0..total);
        branches
            .iter()
            .position(|b| {
                let w = u64::from(b.weight);
                if k < w {
                    true
                } else {
                    k -= w;
                    false
                }
            })
            .expect("weights sum to total")
    };
    Ok(OutputChoice { action, edge, branch })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Emission {
    pub action: ActionId,
    pub component: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Step {
    pub delay: f64,
    /// `None` for the final truncating delay.
    pub emission: Option<Emission>,
    pub state: NetworkState,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum RunEnd {
    /// The observer clock reached the bound.
    Bound,
    /// No component can ever output and the observer clock is stopped.
    Blocked,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Run {
    pub observer: ClockId,
    pub bound: f64,
    pub initial: NetworkState,
    pub steps: Vec<Step>,
    pub end: RunEnd,
}

impl Run {
    pub fn last_state(&self) -> &NetworkState {
        self.steps.last().map_or(&self.initial, |s| &s.state)
    }

    /// States before each step, paired with the step.
    pub fn segments(&self) -> impl Iterator<Item = (&NetworkState, &Step)> + '_ {
        std::iter::once(&self.initial).chain(self.steps.iter().map(|s| &s.state)).zip(&self.steps)
    }
}

#[derive(Clone, Copy, Debug)]
pub struct RunOptions {
    pub step_limit: usize,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions { step_limit: 1_000_000 }
    }
}

/// Aggregated counters over generated runs.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Diagnostics {
    pub runs: u64,
    pub steps: u64,
    /// Component-steps in which a component had no usable delay window.
    pub blocked_components: u64,
    /// Steps with several components drawing the same minimal delay.
    pub ties: u64,
    pub blocked_runs: u64,
}

impl Diagnostics {
    pub fn merge(&mut self, o: &Diagnostics) {
        self.runs += o.runs;
        self.steps += o.steps;
        self.blocked_components += o.blocked_components;
        self.ties += o.ties;
        self.blocked_runs += o.blocked_runs;
    }
}

/// Generates one run until the observer clock reaches `bound`.
pub fn random_run<R: Rng + ?Sized>(model: &NetworkModel, observer: ClockId, bound: f64, rng: &mut R) -> Result<Run> {
    random_run_with(model, observer, bound, rng, RunOptions::default(), &mut Diagnostics::default(), |_, _| {})
}

/// [`random_run`] with options, counters, and a hook receiving each step's
/// sampled delays and the winning component.
pub fn random_run_with<R: Rng + ?Sized>(
    model: &NetworkModel,
    observer: ClockId,
    bound: f64,
    rng: &mut R,
    opts: RunOptions,
    diag: &mut Diagnostics,
    mut on_race: impl FnMut(&[f64], Option<usize>),
) -> Result<Run> {
    if observer.0 >= model.clocks.len() {
        return Err(Error::UnknownClock(observer.0));
    }
    if bound.is_nan() || bound < 0.0 {
        return Err(Error::InvalidParameter(format!("bound {bound} is negative")));
    }
    let n = model.components.len();
    let initial = model.initial_state();
    let mut state = initial.clone();
    let mut steps = Vec::new();
    let mut delays = vec![0.0; n];
    diag.runs += 1;
    let end = loop {
        if steps.len() >= opts.step_limit {
            return Err(Error::StepLimit(opts.step_limit));
        }
        for (i, d) in delays.iter_mut().enumerate() {
            let dist = delay_distribution(model, &state, i);
            if dist == DelayDistribution::Blocked {
                diag.blocked_components += 1;
            }
            *d = sample_delay(&dist, rng);
        }
        let dmin = delays.iter().copied().fold(f64::INFINITY, f64::min);
        let rates = model.rates(&state.locations);
        let rc = f64::from(rates.get(observer));
        let vc = state.clocks.get(observer);
        if vc >= bound {
            on_race(&delays, None);
            break RunEnd::Bound;
        }
        if dmin.is_infinite() && rc == 0.0 {
            on_race(&delays, None);
            diag.blocked_runs += 1;
            break RunEnd::Blocked;
        }
        if dmin.is_infinite() || vc + dmin * rc >= bound {
            let d = (bound - vc) / rc;
            on_race(&delays, None);
            let mut next = state.clone();
            next.clocks = advance(&state.clocks, &rates, d);
            next.clocks.0[observer.0] = bound;
            steps.push(Step { delay: d, emission: None, state: next });
            diag.steps += 1;
            break RunEnd::Bound;
        }
        let winners: Vec<usize> = (0..n).filter(|&i| delays[i] == dmin).collect();
        let winner = if winners.len() == 1 {
            winners[0]
        } else {
            diag.ties += 1;
            winners[rng.random_range(0..winners.len())]
        };
        on_race(&delays, Some(winner));
        let mut next = state.clone();
        next.clocks = advance(&state.clocks, &rates, dmin);
        let choice = sample_output(model, &next, winner, rng)?;
        next = fire(model, &next, winner, choice)?;
        steps.push(Step {
            delay: dmin,
            emission: Some(Emission { action: choice.action, component: winner }),
            state: next.clone(),
        });
        diag.steps += 1;
        state = next;
    };
    Ok(Run { observer, bound, initial, steps, end })
}

/// Applies the winner's chosen branch and every receiver's input edge to the
/// post-delay state `pre`. Receiver guards are read on `pre`.
pub fn fire(model: &NetworkModel, pre: &NetworkState, sender: usize, choice: OutputChoice) -> Result<NetworkState> {
    let mut moves: Vec<(usize, usize, usize)> = vec![(sender, choice.edge, choice.branch)];
    for (j, comp) in model.components.iter().enumerate() {
        if j == sender {
            continue;
        }
        let mut found = None;
        for (ei, e) in comp.in_edges(pre.locations[j], choice.action) {
            debug_assert_eq!(e.direction, Direction::Input);
            if guard_holds(model, &e.guard, pre, EMISSION_SLACK)? {
                if found.is_some() {
                    return Err(Error::DeterminismViolation {
                        component: comp.name.clone(),
                        action: model.actions[choice.action.0].clone(),
                    });
                }
                found = Some(ei);
            }
        }
        if let Some(ei) = found {
            moves.push((j, ei, 0));
        }
    }
    let mut next = pre.clone();
    for (j, ei, bi) in moves {
        let b = &model.components[j].edges[ei].branches[bi];
        for c in &b.resets {
            next.clocks.0[c.0] = 0.0;
        }
        for (v, e) in &b.updates {
            let value = e.eval(&next.ints);
            let decl = &model.ints[v.0];
            if value < decl.lo || value > decl.hi {
                return Err(Error::IntOutOfBounds { var: decl.name.clone(), value });
            }
            next.ints[v.0] = value;
        }
        next.locations[j] = b.target;
    }
    Ok(next)
}

/// True when every non-blocked component's invariant holds in `state`.
pub fn invariants_hold_unblocked(model: &NetworkModel, state: &NetworkState, eps: f64) -> bool {
    model.components.iter().enumerate().all(|(ci, comp)| {
        let loc: LocId = state.locations[ci];
        delay_distribution(model, state, ci) == DelayDistribution::Blocked
            || comp.locations[loc.0]
                .invariant
                .clock_atoms()
                .all(|(c, rel, n)| clock_atom_holds(state.clocks.get(c), rel, n, eps))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::examples::{gen_abt, AbtVariant};
    use crate::model::{validate, TIME};
    use crate::rng::substream;
    use crate::text::parse_model;

    fn single(inv: &str, guard: &str, extra: &str) -> NetworkModel {
        let src = format!(
            "network s\nautomaton A\n  clock x\n  action out a\n  location A0 {inv} {extra}\n  location A1\n  initial A0\n  edge A0 -> A1 on a! {guard}\nend\n"
        );
        validate(&parse_model(&src).unwrap()).unwrap()
    }

    #[test]
    fn uniform_window() {
        let m = single("inv x<=3", "guard x>=1", "");
        let s = m.initial_state();
        assert_eq!(delay_distribution(&m, &s, 0), DelayDistribution::Uniform { lo: 1.0, hi: 3.0 });
        let m = single("inv x<=3", "guard x>=1", "rate x=2");
        assert_eq!(delay_distribution(&m, &s, 0), DelayDistribution::Uniform { lo: 0.5, hi: 1.5 });
    }

    #[test]
    fn exponential_window() {
        let m = single("", "", "exprate 1/2");
        assert_eq!(
            delay_distribution(&m, &m.initial_state(), 0),
            DelayDistribution::Exponential { shift: 0.0, rate: 0.5 }
        );
    }

    #[test]
    fn blocked_window() {
        let m = single("inv x<=1", "guard x>=2", "");
        assert_eq!(delay_distribution(&m, &m.initial_state(), 0), DelayDistribution::Blocked);
        let mut r = substream(0, 0);
        assert_eq!(sample_delay(&DelayDistribution::Blocked, &mut r), f64::INFINITY);
        assert_eq!(sample_delay(&DelayDistribution::Uniform { lo: 1.0, hi: 1.0 }, &mut r), 1.0);
    }

    #[test]
    fn deterministic_single_step() {
        let m = single("inv x<=1", "guard x>=1", "");
        let run = random_run(&m, TIME, 5.0, &mut substream(1, 0)).unwrap();
        assert_eq!(run.steps[0].delay, 1.0);
        assert_eq!(run.steps[0].emission, Some(Emission { action: ActionId(0), component: 0 }));
        // After a, A1 has no outputs; the run is truncated at the bound.
        assert_eq!(run.steps.len(), 2);
        assert_eq!(run.end, RunEnd::Bound);
        assert_eq!(run.last_state().clocks.get(TIME), 5.0);
    }

    #[test]
    fn truncation_before_first_output() {
        let m = single("inv x<=1", "guard x>=1", "");
        let run = random_run(&m, TIME, 0.5, &mut substream(1, 0)).unwrap();
        assert_eq!(run.steps.len(), 1);
        assert_eq!(run.steps[0].delay, 0.5);
        assert!(run.steps[0].emission.is_none());
    }

    #[test]
    fn blocked_run_with_stopped_observer() {
        let m = single("inv x<=1", "guard x>=1", "");
        let x = m.clock_index("x").unwrap();
        // x keeps growing in A1, so use a model where the observer stops.
        let src = "network s\nautomaton A\n  clock x\n  action out a\n  location A0 inv x<=1\n  location A1 rate x=0\n  initial A0\n  edge A0 -> A1 on a! guard x>=1\nend\n";
        let m2 = validate(&parse_model(src).unwrap()).unwrap();
        let run = random_run(&m2, x, 5.0, &mut substream(1, 0)).unwrap();
        assert_eq!(run.end, RunEnd::Blocked);
        assert_eq!(run.steps.len(), 1);
        let _ = m;
    }

    #[test]
    fn seeded_runs_replay() {
        let m = validate(&gen_abt(AbtVariant::Abt)).unwrap();
        let a = random_run(&m, TIME, 2.0, &mut substream(42, 0)).unwrap();
        let b = random_run(&m, TIME, 2.0, &mut substream(42, 0)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn uniform_sample_moments() {
        let mut r = substream(3, 0);
        let n = 100_000;
        let mut xs: Vec<f64> =
            (0..n).map(|_| sample_delay(&DelayDistribution::Uniform { lo: 1.0, hi: 3.0 }, &mut r)).collect();
        let mean = xs.iter().sum::<f64>() / n as f64;
        assert!((mean - 2.0).abs() < 0.01, "mean {mean}");
        xs.sort_by(f64::total_cmp);
        let ks = xs
            .iter()
            .enumerate()
            .map(|(i, x)| {
                let f = (x - 1.0) / 2.0;
                (f - i as f64 / n as f64).abs().max(((i + 1) as f64 / n as f64 - f).abs())
            })
            .fold(0.0, f64::max);
        assert!(ks < 0.01, "ks {ks}");
    }

    #[test]
    fn output_and_branch_frequencies() {
        let src = "network s\nautomaton A\n  clock x\n  action out a b\n  location A0 inv x<=1\n  location A1\n  location A2\n  initial A0\n  edge A0 -> A1 on a!\n  edge A0 -> A2 on b!\nend\n";
        let m = validate(&parse_model(src).unwrap()).unwrap();
        let s = m.initial_state();
        let mut r = substream(5, 0);
        let n = 100_000;
        let a = (0..n).filter(|_| sample_output(&m, &s, 0, &mut r).unwrap().action == ActionId(0)).count();
        assert!((a as f64 / n as f64 - 0.5).abs() < 0.01);

        let src = "network s\nautomaton A\n  clock x\n  action out a\n  location A0 inv x<=1\n  location A1\n  location A2\n  initial A0\n  edge A0 -> A1 on a! { weight 2 } { weight 1 goto A2 }\nend\n";
        let m = validate(&parse_model(src).unwrap()).unwrap();
        let s = m.initial_state();
        let first = (0..n).filter(|_| sample_output(&m, &s, 0, &mut r).unwrap().branch == 0).count();
        assert!((first as f64 / n as f64 - 2.0 / 3.0).abs() < 0.01);

        let m = single("inv x<=3", "guard x>=1", "");
        assert!(matches!(sample_output(&m, &m.initial_state(), 0, &mut r), Err(Error::NoEnabledOutput(_))));
    }

    #[test]
    fn race_of_two_uniforms() {
        let m = validate(&gen_abt(AbtVariant::Abt)).unwrap();
        let a = m.component_index("A").unwrap();
        let n = 100_000u64;
        let mut wins = 0;
        for k in 0..n {
            let run = random_run(&m, TIME, 3.0, &mut substream(11, k)).unwrap();
            if run.steps[0].emission.map(|e| e.component) == Some(a) {
                wins += 1;
            }
        }
        assert!((wins as f64 / n as f64 - 0.75).abs() < 0.01);
    }
}
