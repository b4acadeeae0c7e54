//! Generators for the benchmark networks: the A/B/T race family, a
//! train-gate controller, random duration probabilistic automata (job shops)
//! and a one-shot timer used to build crossing comparisons.

use std::fmt::Write;

use rand::Rng;

use crate::error::{Error, Result};
use crate::rng::substream;
use crate::text::{parse_model, ModelDocument};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AbtVariant {
    /// `A | B | T`
    Abt,
    /// `AB | T`
    AbT,
    /// `A | B_r | T`
    AbrT,
}

impl AbtVariant {
    pub const ALL: [AbtVariant; 3] = [AbtVariant::Abt, AbtVariant::AbT, AbtVariant::AbrT];

    pub fn name(self) -> &'static str {
        match self {
            AbtVariant::Abt => "abt",
            AbtVariant::AbT => "ab_t",
            AbtVariant::AbrT => "abr_t",
        }
    }

    /// `(time ≤ 2, C ≤ 6)` reachability probabilities of `T.T3`.
    pub fn exact(self) -> (f64, f64) {
        let e = std::f64::consts::E;
        match self {
            AbtVariant::Abt => (0.75, 0.75),
            AbtVariant::AbT => (0.5, 0.5),
            AbtVariant::AbrT => (
                2.0 * (1.0 - (-0.5f64).exp()) - 1.0 / e,
                2.0 * (1.0 - (-0.5f64).exp()) - 2.0 * ((-1.0f64).exp() - (-1.5f64).exp()),
            ),
        }
    }
}

const A: &str = "\
automaton A
  clock x
  action out a
  location A0 inv x<=1
  location A1
  initial A0
  edge A0 -> A1 on a!
end
";

const B: &str = "\
automaton B
  clock y
  action out b
  location B0 inv y<=2
  location B1
  initial B0
  edge B0 -> B1 on b!
end
";

const B_R: &str = "\
automaton B
  action out b
  location B0 exprate 1/2
  location B1
  initial B0
  edge B0 -> B1 on b!
end
";

const AB: &str = "\
automaton AB
  clock x y
  action out a b
  location AB0 inv x<=2
  location AB1 inv y<=2
  location AB2
  initial AB0
  edge AB0 -> AB1 on a! reset y
  edge AB1 -> AB2 on b!
end
";

// Observer cost C grows at 4 before `a`, at 2 between `a` and `b`, then stops.
const T: &str = "\
automaton T
  clock C
  action in a b
  location T0 rate C=4
  location T1 rate C=2
  location T2 rate C=0
  location T3 rate C=0
  initial T0
  edge T0 -> T1 on a?
  edge T0 -> T2 on b?
  edge T1 -> T3 on b?
end
";

pub fn gen_abt(variant: AbtVariant) -> ModelDocument {
    let parts: &[&str] = match variant {
        AbtVariant::Abt => &[A, B, T],
        AbtVariant::AbT => &[AB, T],
        AbtVariant::AbrT => &[A, B_R, T],
    };
    let mut src = format!("network {}\n", variant.name());
    for p in parts {
        src.push('\n');
        src.push_str(p);
    }
    parse_model(&src).expect("built-in model parses")
}

pub const ABT_TIME_QUERY: &str = "Pr[time<=2](<> T.T3)";
pub const ABT_COST_QUERY: &str = "Pr[C<=6](<> T.T3)";

/// Trains arrive at exponential rates `(i+1)/n`, queue at a gate that grants
/// the bridge after a uniform delay in `[0,1]`, and cross in `[3,5]`.
pub fn gen_traingate(n: usize) -> ModelDocument {
    assert!(n >= 1, "at least one train");
    let mut s = format!("network traingate{n}\nint len [0,{n}] = 0\n");
    for i in 0..n {
        let _ = writeln!(s, "int wait{i} [0,1] = 0");
    }
    for i in 0..n {
        let _ = write!(
            s,
            "
automaton Train{i}
  clock x{i}
  action out appr{i} leave{i}
  location Safe exprate {num}/{n}
  location Appr
  location Cross inv x{i}<=5
  initial Safe
  edge Safe -> Appr on appr{i}!
  edge Appr -> Cross on go{i}? reset x{i}
  edge Cross -> Safe on leave{i}! guard x{i}>=3
end
",
            num = i + 1
        );
    }
    s.push_str("\nautomaton Gate\n  clock g\n  action out");
    for i in 0..n {
        let _ = write!(s, " go{i}");
    }
    s.push_str("\n  location Free inv g<=1\n  location Occ\n  initial Free\n");
    for i in 0..n {
        let _ = writeln!(s, "  edge Free -> Occ on go{i}! guard wait{i}==1 set wait{i} = 0 set len = len - 1");
        let _ = writeln!(s, "  edge Occ -> Free on leave{i}? reset g");
        let _ = writeln!(s, "  edge Free -> Free on appr{i}? reset g set wait{i} = 1 set len = len + 1");
        let _ = writeln!(s, "  edge Occ -> Occ on appr{i}? set wait{i} = 1 set len = len + 1");
    }
    s.push_str("end\n");
    parse_model(&s).expect("generated train-gate parses")
}

pub fn traingate_query(train: usize, t: u32) -> String {
    format!("Pr[time<={t}](<> Train{train}.Cross)")
}

/// Job shop of `n` sequential task chains competing for `m` resource types.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DpaSpec {
    pub n: usize,
    pub k: usize,
    pub m: usize,
    pub capacities: Vec<i64>,
    /// `durations[i][j]` is the `[lo, hi]` interval of task `j` of chain `i`.
    pub durations: Vec<Vec<(u32, u32)>>,
    /// `demands[i][j][r]` units of resource `r` held by task `j` of chain `i`.
    pub demands: Vec<Vec<Vec<i64>>>,
    /// Chain indices from highest to lowest priority.
    pub priority: Vec<usize>,
}

impl DpaSpec {
    /// Random instance: capacities in 1..=3, durations with `lo` in 1..=5 and
    /// width in 0..=5, demands up to the capacity, identity priority.
    pub fn random(n: usize, k: usize, m: usize, seed: u64) -> DpaSpec {
        let mut rng = substream(seed, 0);
        let capacities: Vec<i64> = (0..m).map(|_| rng.random_range(1..=3)).collect();
        let durations = (0..n)
            .map(|_| {
                (0..k)
                    .map(|_| {
                        let lo = rng.random_range(1..=5);
                        (lo, lo + rng.random_range(0..=5))
                    })
                    .collect()
            })
            .collect();
        let demands = (0..n)
            .map(|_| (0..k).map(|_| capacities.iter().map(|&c| rng.random_range(0..=c)).collect()).collect())
            .collect();
        DpaSpec { n, k, m, capacities, durations, demands, priority: (0..n).collect() }
    }

    fn check(&self) -> Result<()> {
        let bad = |s: String| Err(Error::InvalidParameter(s));
        if self.n == 0 || self.k == 0 {
            return bad("n and k must be at least 1".into());
        }
        if self.capacities.len() != self.m
            || self.durations.len() != self.n
            || self.demands.len() != self.n
            || self.durations.iter().any(|d| d.len() != self.k)
            || self.demands.iter().any(|d| d.len() != self.k || d.iter().any(|r| r.len() != self.m))
        {
            return bad("dimensions do not match n, k, m".into());
        }
        let mut p = self.priority.clone();
        p.sort_unstable();
        if p != (0..self.n).collect::<Vec<_>>() {
            return bad("priority must be a permutation of the chains".into());
        }
        for (i, ds) in self.durations.iter().enumerate() {
            for (j, &(lo, hi)) in ds.iter().enumerate() {
                if lo > hi {
                    return bad(format!("task {j} of chain {i}: empty interval [{lo},{hi}]"));
                }
            }
        }
        for (i, ts) in self.demands.iter().enumerate() {
            for (j, rs) in ts.iter().enumerate() {
                for (r, &d) in rs.iter().enumerate() {
                    if d < 0 || d > self.capacities[r] {
                        return Err(Error::InfeasibleDemand(format!(
                            "task {j} of chain {i} needs {d} of resource {r} (capacity {})",
                            self.capacities[r]
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}

/// One automaton `S<i>` per chain (wait/busy locations ending in `Done`) and a
/// scheduler granting tasks by fixed priority whenever resources allow.
pub fn gen_dpa(spec: &DpaSpec) -> Result<ModelDocument> {
    spec.check()?;
    let (n, k) = (spec.n, spec.k);
    let mut s = format!("network dpa_{n}_{k}_{}\n", spec.m);
    for (r, c) in spec.capacities.iter().enumerate() {
        let _ = writeln!(s, "int res{r} [0,{c}] = {c}");
    }
    for i in 0..n {
        let _ = writeln!(s, "int wait{i} [0,1] = 1");
        let _ = writeln!(s, "int stage{i} [0,{k}] = 0");
    }
    for i in 0..n {
        let _ = write!(s, "\nautomaton S{i}\n  clock x{i}\n  action out fin{i}\n");
        for j in 0..k {
            let (_, hi) = spec.durations[i][j];
            let _ = writeln!(s, "  location W{j}");
            let _ = writeln!(s, "  location B{j} inv x{i}<={hi}");
        }
        s.push_str("  location Done\n  initial W0\n");
        for j in 0..k {
            let (lo, _) = spec.durations[i][j];
            let _ = writeln!(s, "  edge W{j} -> B{j} on grant{i}? reset x{i}");
            let next = if j + 1 < k { format!("W{}", j + 1) } else { "Done".into() };
            let _ = write!(s, "  edge B{j} -> {next} on fin{i}! guard x{i}>={lo}");
            for (r, &d) in spec.demands[i][j].iter().enumerate() {
                if d > 0 {
                    let _ = write!(s, " set res{r} = res{r} + {d}");
                }
            }
            let _ = writeln!(s, " set stage{i} = {} set wait{i} = {}", j + 1, u8::from(j + 1 < k));
        }
        s.push_str("end\n");
    }
    s.push_str("\nautomaton Sched\n  clock s\n  action out");
    for i in 0..n {
        let _ = write!(s, " grant{i}");
    }
    s.push_str("\n  location Idle inv s<=0\n  initial Idle\n");
    for (rank, &i) in spec.priority.iter().enumerate() {
        for j in 0..k {
            let _ = write!(s, "  edge Idle -> Idle on grant{i}! guard wait{i}==1 && stage{i}=={j}");
            for (r, &d) in spec.demands[i][j].iter().enumerate() {
                if d > 0 {
                    let _ = write!(s, " && res{r}>={d}");
                }
            }
            for &h in &spec.priority[..rank] {
                let _ = write!(s, " && wait{h}==0");
            }
            let _ = write!(s, " set wait{i} = 0");
            for (r, &d) in spec.demands[i][j].iter().enumerate() {
                if d > 0 {
                    let _ = write!(s, " set res{r} = res{r} - {d}");
                }
            }
            s.push('\n');
        }
        let _ = writeln!(s, "  edge Idle -> Idle on fin{i}? reset s");
    }
    s.push_str("end\n");
    Ok(parse_model(&s).expect("generated job shop parses"))
}

/// All chains finished within `t` time units.
pub fn dpa_query(n: usize, t: u32) -> String {
    let phi: Vec<String> = (0..n).map(|i| format!("S{i}.Done")).collect();
    format!("Pr[time<={t}](<> {})", phi.join(" && "))
}

/// Single automaton `P` that outputs `done` once, uniformly in
/// `[lo/scale, hi/scale]` time units.
pub fn gen_timer(lo: u32, hi: u32, scale: u32) -> ModelDocument {
    let src = format!(
        "network timer\nautomaton P\n  clock x\n  action out done\n  location P0 inv x<={hi} rate x={scale}\n  location P1\n  initial P0\n  edge P0 -> P1 on done! guard x>={lo}\nend\n"
    );
    parse_model(&src).expect("timer parses")
}

pub fn timer_query(bound: u32) -> String {
    format!("Pr[time<={bound}](<> P.P1)")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::validate;

    #[test]
    fn abt_variants_validate() {
        for v in AbtVariant::ALL {
            let m = validate(&gen_abt(v)).unwrap();
            assert_eq!(m.name, v.name());
        }
    }

    #[test]
    fn exact_values() {
        let (t, c) = AbtVariant::AbrT.exact();
        assert!((t - 0.419_06).abs() < 1e-5);
        assert!((c - 0.497_44).abs() < 1e-5);
    }

    #[test]
    fn traingate_counts() {
        let m = validate(&gen_traingate(6)).unwrap();
        assert_eq!(m.components.len(), 7);
    }

    #[test]
    fn dpa_random_is_deterministic() {
        let a = gen_dpa(&DpaSpec::random(4, 4, 3, 9)).unwrap();
        let b = gen_dpa(&DpaSpec::random(4, 4, 3, 9)).unwrap();
        assert_eq!(a.to_string(), b.to_string());
        validate(&a).unwrap();
    }

    #[test]
    fn dpa_infeasible_demand() {
        let mut spec = DpaSpec::random(2, 2, 1, 1);
        spec.demands[1][0][0] = spec.capacities[0] + 1;
        assert!(matches!(gen_dpa(&spec), Err(Error::InfeasibleDemand(_))));
    }

    #[test]
    fn timer_validates() {
        validate(&gen_timer(2, 4, 1)).unwrap();
    }
}
