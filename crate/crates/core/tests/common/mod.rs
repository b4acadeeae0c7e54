#![allow(dead_code)]

use std::fmt::Write;

use proptest::prelude::*;

use nptasmc::model::{validate, NetworkModel};
use nptasmc::text::parse_model;

/// Delay behaviour of one racing component.
#[derive(Clone, Debug)]
pub enum Racer {
    /// Uniform in `[lo/scale, (lo+width)/scale]`.
    Window {
        lo: u32,
        width: u32,
        scale: u32,
    },
    Exp {
        num: u64,
        den: u64,
    },
}

#[derive(Clone, Debug)]
pub struct RaceSpec {
    pub racers: Vec<(Racer, bool)>,
    /// Rates of the listener's cost clock before and after the first `a0`.
    pub cost_rates: (u32, u32),
}

pub fn racer() -> impl Strategy<Value = Racer> {
    prop_oneof![
        3 => (0u32..4, 0u32..4, 1u32..4).prop_map(|(lo, width, scale)| Racer::Window { lo, width: if lo == 0 { width.max(1) } else { width }, scale }),
        1 => (1u64..6, 1u64..4).prop_map(|(num, den)| Racer::Exp { num, den }),
    ]
}

pub fn race_spec() -> impl Strategy<Value = RaceSpec> {
    (prop::collection::vec((racer(), any::<bool>()), 1..4), (0u32..4, 0u32..4))
        .prop_map(|(racers, cost_rates)| RaceSpec { racers, cost_rates })
}

/// Racers `P<i>` each emitting `a<i>` once or repeatedly, plus a listener
/// `Obs` that moves to `O1` on `a0` and carries the cost clock `C`.
pub fn race_text(spec: &RaceSpec) -> String {
    let mut s = String::from("network race\n");
    for (i, (r, cyclic)) in spec.racers.iter().enumerate() {
        let target = if *cyclic { "Q0" } else { "Q1" };
        let _ = writeln!(s, "\nautomaton P{i}\n  clock x{i}\n  action out a{i}");
        match r {
            Racer::Window { lo, width, scale } => {
                let _ = writeln!(s, "  location Q0 inv x{i}<={} rate x{i}={scale}", lo + width);
                let _ = writeln!(s, "  location Q1\n  initial Q0");
                let _ = writeln!(s, "  edge Q0 -> {target} on a{i}! guard x{i}>={lo} reset x{i}");
            }
            Racer::Exp { num, den } => {
                let _ = writeln!(s, "  location Q0 exprate {num}/{den}\n  location Q1\n  initial Q0");
                let _ = writeln!(s, "  edge Q0 -> {target} on a{i}! reset x{i}");
            }
        }
        s.push_str("end\n");
    }
    let (r0, r1) = spec.cost_rates;
    let _ = write!(
        s,
        "\nautomaton Obs\n  clock C\n  action in a0\n  location O0 rate C={r0}\n  location O1 rate C={r1}\n  initial O0\n  edge O0 -> O1 on a0?\nend\n"
    );
    s
}

pub fn race_model(spec: &RaceSpec) -> NetworkModel {
    validate(&parse_model(&race_text(spec)).expect("race model parses")).expect("race model validates")
}

/// State formulas over a race network with `n` racers, as query text.
pub fn phi_text(n: usize) -> impl Strategy<Value = String> {
    let rel = prop::sample::select(vec!["<", "<=", ">", ">="]);
    let leaf = prop_oneof![
        prop::sample::select(vec!["Obs.O0", "Obs.O1", "true", "false"]).prop_map(String::from),
        (0..n, any::<bool>()).prop_map(|(i, b)| format!("P{i}.{}", if b { "Q1" } else { "Q0" })),
        (0..n, rel.clone(), 0i64..6).prop_map(|(i, r, k)| format!("x{i}{r}{k}")),
        (rel.clone(), 0i64..5).prop_map(|(r, k)| format!("time{r}{k}")),
        (rel, 0i64..10).prop_map(|(r, k)| format!("C{r}{k}")),
    ];
    leaf.prop_recursive(3, 12, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(|p| format!("!({p})")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a}) && ({b})")),
            (inner.clone(), inner).prop_map(|(a, b)| format!("({a}) || ({b})")),
        ]
    })
}
