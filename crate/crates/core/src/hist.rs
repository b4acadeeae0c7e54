//! Hit-cost histograms over `[0, c]`.

use std::fmt::Write;

use serde::Serialize;

use crate::monitor::Outcome;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Histogram {
    /// `bins + 1` edges from `0` to `c`.
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
    /// Counts divided by the number of runs.
    pub frequencies: Vec<f64>,
    pub cumulative: Vec<f64>,
    pub runs: u64,
    pub unsatisfied: u64,
}

/// Buckets the hit costs of satisfied outcomes into `bins` equal-width,
/// left-inclusive bins over `[0, c]`; a hit at exactly `c` goes to the last bin.
pub fn histogram(outcomes: &[Outcome], bins: usize, c: f64) -> Histogram {
    let bins = bins.max(1);
    let width = c / bins as f64;
    let mut counts = vec![0u64; bins];
    let mut unsatisfied = 0;
    for o in outcomes {
        match (o.satisfied, o.hit_cost) {
            (true, Some(h)) => {
                let i = if width > 0.0 { (h / width).floor() as usize } else { 0 };
                counts[i.min(bins - 1)] += 1;
            }
            _ => unsatisfied += 1,
        }
    }
    let runs = outcomes.len() as u64;
    let frequencies: Vec<f64> = counts.iter().map(|&k| if runs == 0 { 0.0 } else { k as f64 / runs as f64 }).collect();
    let mut acc = 0u64;
    let cumulative = counts
        .iter()
        .map(|&k| {
            acc += k;
            if runs == 0 {
                0.0
            } else {
                acc as f64 / runs as f64
            }
        })
        .collect();
    Histogram {
        edges: (0..=bins).map(|i| i as f64 * width).collect(),
        counts,
        frequencies,
        cumulative,
        runs,
        unsatisfied,
    }
}

impl Histogram {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("bin,lo,hi,count,frequency,cumulative\n");
        for i in 0..self.counts.len() {
            let _ = writeln!(
                s,
                "{i},{},{},{},{},{}",
                self.edges[i],
                self.edges[i + 1],
                self.counts[i],
                self.frequencies[i],
                self.cumulative[i]
            );
        }
        s
    }
}
