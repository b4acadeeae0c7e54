//! Line-oriented run traces (`.nprun`).
//!
//! ```text
//! run observer time bound 2.0 end bound
//! init A0 B0 T0 | 0.0 0.0 0.0 0.0 |
//! delay 0.5
//! output a by A
//! state A1 B0 T1 | 0.5 0.5 0.5 2.0 |
//! ```

use std::fmt::Write;

use crate::engine::{Emission, Run, RunEnd, Step};
use crate::error::{ParseError, Pos};
use crate::model::{ClockValuation, NetworkModel, NetworkState};

fn write_state(out: &mut String, model: &NetworkModel, s: &NetworkState) {
    for (ci, l) in s.locations.iter().enumerate() {
        let _ = write!(out, "{} ", model.location_name(ci, *l));
    }
    out.push('|');
    for v in &s.clocks.0 {
        let _ = write!(out, " {v:?}");
    }
    out.push_str(" |");
    for v in &s.ints {
        let _ = write!(out, " {v}");
    }
    out.push('\n');
}

/// Text form of `run`; [`parse_run`] reads it back exactly.
pub fn serialize_run(run: &Run, model: &NetworkModel) -> String {
    let mut out = String::new();
    let end = match run.end {
        RunEnd::Bound => "bound",
        RunEnd::Blocked => "blocked",
    };
    let _ = writeln!(out, "run observer {} bound {:?} end {end}", model.clocks[run.observer.0].name, run.bound);
    out.push_str("init ");
    write_state(&mut out, model, &run.initial);
    for s in &run.steps {
        let _ = writeln!(out, "delay {:?}", s.delay);
        if let Some(e) = s.emission {
            let _ = writeln!(out, "output {} by {}", model.actions[e.action.0], model.components[e.component].name);
        }
        out.push_str("state ");
        write_state(&mut out, model, &s.state);
    }
    out
}

struct Lines<'a> {
    it: std::iter::Peekable<std::iter::Enumerate<std::str::Lines<'a>>>,
    line: usize,
}

impl<'a> Lines<'a> {
    fn peek_words(&mut self) -> Option<Vec<&'a str>> {
        while let Some((_, l)) = self.it.peek() {
            if l.trim().is_empty() {
                self.it.next();
            } else {
                return Some(l.split_whitespace().collect());
            }
        }
        None
    }

    fn next_words(&mut self) -> Option<Vec<&'a str>> {
        let w = self.peek_words()?;
        let (i, _) = self.it.next()?;
        self.line = i + 1;
        Some(w)
    }

    fn err(&self, msg: impl Into<String>) -> ParseError {
        ParseError::syntax(Pos { line: self.line.max(1), col: 1 }, msg)
    }
}

fn parse_state(lines: &Lines, words: &[&str], model: &NetworkModel) -> Result<NetworkState, ParseError> {
    let mut parts = words.split(|w| *w == "|");
    let (Some(locs), Some(clocks), Some(ints), None) = (parts.next(), parts.next(), parts.next(), parts.next()) else {
        return Err(lines.err("state needs `locations | clocks | ints`"));
    };
    if locs.len() != model.components.len() || clocks.len() != model.clocks.len() || ints.len() != model.ints.len() {
        return Err(lines.err("state does not match the model's dimensions"));
    }
    let locations = locs
        .iter()
        .enumerate()
        .map(|(ci, l)| {
            model.components[ci].location_index(l).ok_or_else(|| lines.err(format!("unknown location `{l}`")))
        })
        .collect::<Result<_, _>>()?;
    let clocks = clocks
        .iter()
        .map(|v| v.parse::<f64>().map_err(|_| lines.err(format!("bad clock value `{v}`"))))
        .collect::<Result<_, _>>()?;
    let ints = ints
        .iter()
        .map(|v| v.parse::<i64>().map_err(|_| lines.err(format!("bad integer `{v}`"))))
        .collect::<Result<_, _>>()?;
    Ok(NetworkState { locations, clocks: ClockValuation(clocks), ints })
}

pub fn parse_run(text: &str, model: &NetworkModel) -> Result<Run, ParseError> {
    let mut lines = Lines { it: text.lines().enumerate().peekable(), line: 0 };
    let head = lines.next_words().ok_or_else(|| lines.err("empty run trace"))?;
    let (observer, bound, end) = match head.as_slice() {
        ["run", "observer", obs, "bound", b, "end", e] => {
            let observer = model.clock_index(obs).ok_or_else(|| ParseError::UnknownObserver(obs.to_string()))?;
            let bound = b.parse::<f64>().map_err(|_| lines.err(format!("bad bound `{b}`")))?;
            let end = match *e {
                "bound" => RunEnd::Bound,
                "blocked" => RunEnd::Blocked,
                other => return Err(lines.err(format!("unknown run end `{other}`"))),
            };
            (observer, bound, end)
        }
        _ => return Err(lines.err("expected `run observer <clock> bound <c> end <kind>`")),
    };
    let init = lines.next_words().ok_or_else(|| lines.err("missing `init` line"))?;
    if init.first() != Some(&"init") {
        return Err(lines.err("expected `init`"));
    }
    let initial = parse_state(&lines, &init[1..], model)?;
    let mut steps = Vec::new();
    while let Some(w) = lines.next_words() {
        let delay = match w.as_slice() {
            ["delay", d] => d.parse::<f64>().map_err(|_| lines.err(format!("bad delay `{d}`")))?,
            _ => return Err(lines.err("expected `delay <d>`")),
        };
        let mut w = lines.next_words().ok_or_else(|| lines.err("missing state after delay"))?;
        let mut emission = None;
        if let ["output", a, "by", c] = w.as_slice() {
            let action = model.action_index(a).ok_or_else(|| lines.err(format!("unknown action `{a}`")))?;
            let component = model.component_index(c).ok_or_else(|| lines.err(format!("unknown automaton `{c}`")))?;
            emission = Some(Emission { action, component });
            w = lines.next_words().ok_or_else(|| lines.err("missing state after output"))?;
        }
        if w.first() != Some(&"state") {
            return Err(lines.err("expected `state`"));
        }
        let state = parse_state(&lines, &w[1..], model)?;
        steps.push(Step { delay, emission, state });
    }
    Ok(Run { observer, bound, initial, steps, end })
}
