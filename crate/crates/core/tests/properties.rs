mod common;

use proptest::prelude::*;

use nptasmc::engine::{random_run_with, Diagnostics, Run, RunEnd, RunOptions};
use nptasmc::examples::{gen_abt, gen_dpa, gen_timer, gen_traingate, AbtVariant, DpaSpec};
use nptasmc::hist::histogram;
use nptasmc::model::{
    advance, clock_atom_holds, eval_guard, reset, syntactic_compose, validate, ClockId, ClockValuation, NetworkModel,
    NetworkState, RateVector, Rel,
};
use nptasmc::monitor::{check, check_box, check_diamond, Outcome};
use nptasmc::rng::substream;
use nptasmc::stats::{CompareParams, PairState};
use nptasmc::text::{parse_model, parse_query, parse_run, serialize_run, Operator, StateProperty};

use common::{phi_text, race_model, race_spec, race_text};

fn rel() -> impl Strategy<Value = Rel> {
    prop::sample::select(vec![Rel::Lt, Rel::Le, Rel::Gt, Rel::Ge])
}

fn valuation(n: usize) -> impl Strategy<Value = ClockValuation> {
    prop::collection::vec(0.0f64..20.0, n).prop_map(ClockValuation)
}

fn rates(n: usize) -> impl Strategy<Value = RateVector> {
    prop::collection::vec(0u32..5, n).prop_map(RateVector)
}

fn generate(model: &NetworkModel, bound: f64, seed: u64) -> Run {
    let time = model.clock_index("time").unwrap();
    random_run_with(
        model,
        time,
        bound,
        &mut substream(seed, 0),
        RunOptions::default(),
        &mut Diagnostics::default(),
        |_, _| {},
    )
    .unwrap()
}

/// States at the segment starts, every `dt` within each segment, and just
/// before each discrete step.
fn grid(model: &NetworkModel, run: &Run, dt: f64) -> Vec<NetworkState> {
    let mut out = Vec::new();
    let mut push = |start: &NetworkState, tau: f64| {
        let mut s = start.clone();
        s.clocks = advance(&start.clocks, &model.rates(&start.locations), tau);
        out.push(s);
    };
    for (start, step) in run.segments() {
        let mut tau = 0.0;
        while tau < step.delay {
            push(start, tau);
            tau += dt;
        }
        push(start, step.delay);
    }
    push(run.last_state(), 0.0);
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn advance_is_additive(v in valuation(4), r in rates(4), d1 in 0.0f64..10.0, d2 in 0.0f64..10.0) {
        let two = advance(&advance(&v, &r, d1), &r, d2);
        let one = advance(&v, &r, d1 + d2);
        for (a, b) in two.0.iter().zip(&one.0) {
            prop_assert!((a - b).abs() <= 1e-9 * (1.0 + b.abs()));
        }
        prop_assert_eq!(advance(&v, &r, 0.0), v);
    }

    #[test]
    fn reset_is_idempotent(v in valuation(5), ys in prop::collection::vec(0usize..5, 0..5)) {
        let ys: Vec<ClockId> = ys.into_iter().map(ClockId).collect();
        let once = reset(&v, &ys).unwrap();
        prop_assert_eq!(reset(&once, &ys).unwrap(), once.clone());
        for (i, x) in once.0.iter().enumerate() {
            let expect = if ys.contains(&ClockId(i)) { 0.0 } else { v.0[i] };
            prop_assert_eq!(*x, expect);
        }
        prop_assert!(reset(&v, &[ClockId(5)]).is_err());
    }

    #[test]
    fn guards_are_monotone_under_delay(x in 0.0f64..10.0, rate in 0u32..4, d in 0.0f64..5.0, rel in rel(), k in 0i64..10) {
        let later = x + f64::from(rate) * d;
        if rel.is_lower() && clock_atom_holds(x, rel, k, 0.0) {
            prop_assert!(clock_atom_holds(later, rel, k, 0.0));
        }
        if rel.is_upper() && clock_atom_holds(later, rel, k, 0.0) {
            prop_assert!(clock_atom_holds(x, rel, k, 0.0));
        }
    }

    #[test]
    fn composed_invariant_is_conjunction(spec in race_spec(), v in valuation(8)) {
        let m = race_model(&spec);
        let n = m.components.len();
        let c = syntactic_compose(&m, 0, n - 1).unwrap();
        let (c1, c2) = (&m.components[0], &m.components[n - 1]);
        prop_assert_eq!(c.locations.len(), c1.locations.len() * c2.locations.len());
        let mut state = m.initial_state();
        for (i, x) in state.clocks.0.iter_mut().enumerate() {
            *x = v.0[i % v.0.len()];
        }
        for (l1, a) in c1.locations.iter().enumerate() {
            for (l2, b) in c2.locations.iter().enumerate() {
                let joint = &c.locations[l1 * c2.locations.len() + l2];
                prop_assert_eq!(
                    eval_guard(&m, &joint.invariant, &state).unwrap(),
                    eval_guard(&m, &a.invariant, &state).unwrap() && eval_guard(&m, &b.invariant, &state).unwrap()
                );
            }
        }
    }

    #[test]
    fn model_parser_is_total(s in ".{0,200}") {
        let _ = parse_model(&s);
    }

    #[test]
    fn model_parser_survives_mutation(spec in race_spec(), cut in 0usize..400, junk in "[ -~\n]{0,6}") {
        let text = race_text(&spec);
        let cut = cut.min(text.len());
        let mutated = format!("{}{junk}{}", &text[..cut], &text[cut..]);
        if let Ok(doc) = parse_model(&mutated) {
            let _ = validate(&doc);
        }
    }

    #[test]
    fn query_parser_is_total(spec in race_spec(), s in ".{0,80}") {
        let m = race_model(&spec);
        let _ = parse_query(&s, &m);
        let _ = parse_query(&format!("Pr[time<=2](<> {s})"), &m);
    }

    #[test]
    fn model_text_round_trips(spec in race_spec()) {
        let doc = parse_model(&race_text(&spec)).unwrap();
        prop_assert_eq!(parse_model(&doc.to_string()).unwrap(), doc.clone());
        let m = validate(&doc).unwrap();
        let again = validate(&parse_model(&m.to_string()).unwrap()).unwrap();
        prop_assert_eq!(again.to_string(), m.to_string());
    }

    #[test]
    fn query_text_round_trips(spec in race_spec(), phi in phi_text(3), c in 1u32..10) {
        let m = race_model(&spec);
        let n = spec.racers.len();
        prop_assume!((n..3).all(|i| !phi.contains(&format!("P{i}")) && !phi.contains(&format!("x{i}"))));
        let q = parse_query(&format!("Pr[C<={c}](<> {phi}) >= 0.5"), &m).unwrap();
        let again = parse_query(&q.display(&m).to_string(), &m).unwrap();
        prop_assert_eq!(again, q);
    }

    #[test]
    fn run_trace_round_trips(spec in race_spec(), seed in any::<u64>(), bound in 0.0f64..6.0) {
        let m = race_model(&spec);
        let run = generate(&m, bound, seed);
        prop_assert_eq!(parse_run(&serialize_run(&run, &m), &m).unwrap(), run);
    }

    #[test]
    fn winner_has_minimal_delay(spec in race_spec(), seed in any::<u64>()) {
        let m = race_model(&spec);
        let mut races = Vec::new();
        let run = random_run_with(&m, ClockId(0), 5.0, &mut substream(seed, 0), RunOptions::default(), &mut Diagnostics::default(), |d, w| {
            races.push((d.to_vec(), w));
        }).unwrap();
        let winners: Vec<usize> = races.iter().filter_map(|(_, w)| *w).collect();
        let emitters: Vec<usize> = run.steps.iter().filter_map(|s| s.emission.map(|e| e.component)).collect();
        prop_assert_eq!(winners, emitters);
        for (d, w) in &races {
            let min = d.iter().copied().fold(f64::INFINITY, f64::min);
            if let Some(w) = w {
                prop_assert_eq!(d[*w], min);
            }
        }
    }

    #[test]
    fn runs_preserve_invariants(spec in race_spec(), seed in any::<u64>(), bound in 0.0f64..6.0) {
        let m = race_model(&spec);
        let run = generate(&m, bound, seed);
        let eps = 1e-9;
        let ok = |s: &NetworkState| m.invariants_hold(s, eps).into_iter().all(|b| b);
        prop_assert!(ok(&run.initial));
        let mut elapsed = 0.0;
        for (start, step) in run.segments() {
            prop_assert!(step.delay >= 0.0);
            elapsed += step.delay;
            let mut pre = start.clone();
            pre.clocks = advance(&start.clocks, &m.rates(&start.locations), step.delay);
            prop_assert!(ok(&pre));
            prop_assert!(ok(&step.state));
        }
        let t = run.last_state().clocks.get(ClockId(0));
        prop_assert!((t - elapsed).abs() <= 1e-9 * (1.0 + t));
        match run.end {
            RunEnd::Bound => prop_assert_eq!(t, bound),
            RunEnd::Blocked => prop_assert!(t < bound),
        }
    }

    #[test]
    fn box_is_dual_to_diamond(spec in race_spec(), phi in phi_text(1), seed in any::<u64>(), c in 0.5f64..5.0) {
        let m = race_model(&spec);
        let q = parse_query(&format!("Pr[time<={c}](<> {phi})"), &m).unwrap();
        let run = generate(&m, 5.0, seed);
        let obs = q.observer;
        let dia = check_diamond(&m, &run, &q.phi, obs, c).unwrap();
        let not_phi = q.phi.clone().not();
        let bx = check_box(&m, &run, &not_phi, obs, c).unwrap();
        prop_assert_eq!(bx.satisfied, !dia.satisfied);
        let double = StateProperty::Not(Box::new(StateProperty::Not(Box::new(q.phi.clone()))));
        prop_assert_eq!(check_diamond(&m, &run, &double, obs, c).unwrap(), dia);
    }

    #[test]
    fn diamond_is_monotone_in_bound(spec in race_spec(), phi in phi_text(1), seed in any::<u64>(), c1 in 0.0f64..5.0, c2 in 0.0f64..5.0) {
        let m = race_model(&spec);
        let (lo, hi) = if c1 <= c2 { (c1, c2) } else { (c2, c1) };
        let q = parse_query(&format!("Pr[C<=9](<> {phi})"), &m).unwrap();
        let time = ClockId(0);
        let run = generate(&m, 5.0, seed);
        let a = check_diamond(&m, &run, &q.phi, time, lo).unwrap();
        let b = check_diamond(&m, &run, &q.phi, time, hi).unwrap();
        if a.satisfied {
            prop_assert_eq!(a, b);
        }
        if !b.satisfied {
            prop_assert!(!a.satisfied);
        }
    }

    #[test]
    fn monitor_agrees_with_discretization(spec in race_spec(), phi in phi_text(2), seed in any::<u64>(), c in 0.5f64..5.0) {
        let m = race_model(&spec);
        let n = spec.racers.len();
        prop_assume!((n..2).all(|i| !phi.contains(&format!("P{i}")) && !phi.contains(&format!("x{i}"))));
        let q = parse_query(&format!("Pr[time<={c}](<> {phi})"), &m).unwrap();
        let run = generate(&m, 5.0, seed);
        let o = check(&m, &run, &q).unwrap();
        let first = grid(&m, &run, 1e-3)
            .into_iter()
            .filter(|s| s.clocks.get(ClockId(0)) <= c)
            .find(|s| q.phi.holds(s));
        if let Some(s) = first {
            prop_assert!(o.satisfied, "grid hit at time {} missed", s.clocks.get(ClockId(0)));
            prop_assert!(o.hit_time.unwrap() <= s.clocks.get(ClockId(0)) + 1e-9);
        }
        if let Some(h) = o.hit_time {
            prop_assert!(h <= c + 1e-9);
        }
    }

    #[test]
    fn count_form_equals_llr_form(xs in prop::collection::vec(any::<bool>(), 1..400), u0 in 0.1f64..1.0, ratio in 1.2f64..5.0) {
        let p = CompareParams::new(u0, u0 * ratio, 0.05, 0.1, 0.999, 0.99);
        let (a, r, c) = p.count_bounds();
        let mut st = PairState::new(&p).unwrap();
        for &x2 in &xs {
            // Informative pairs only; the precheck sees inequality every time and rejects quickly.
            let v = st.push(!x2, x2);
            if st.informative == 0 {
                continue;
            }
            let (n, t) = (st.informative as f64, st.wins2 as f64);
            if v.is_none() {
                prop_assert!(t < r + n * c + 1e-9 && t > a + n * c - 1e-9);
            } else {
                break;
            }
        }
    }

    #[test]
    fn histogram_is_consistent(hits in prop::collection::vec(prop::option::of(0.0f64..=4.0), 0..200), bins in 1usize..20) {
        let os: Vec<Outcome> = hits
            .iter()
            .map(|h| match h {
                Some(x) => Outcome { satisfied: true, hit_cost: Some(*x), hit_time: Some(*x) },
                None => Outcome::UNSATISFIED,
            })
            .collect();
        let h = histogram(&os, bins, 4.0);
        prop_assert_eq!(h.counts.iter().sum::<u64>() + h.unsatisfied, os.len() as u64);
        prop_assert!(h.cumulative.windows(2).all(|w| w[0] <= w[1]));
        let sat = hits.iter().filter(|h| h.is_some()).count() as f64;
        if !os.is_empty() {
            prop_assert!((h.cumulative[bins - 1] - sat / os.len() as f64).abs() < 1e-12);
        }
        prop_assert_eq!(h.edges.len(), bins + 1);
    }
}

#[test]
fn bundled_models_round_trip() {
    let mut docs: Vec<_> = AbtVariant::ALL.iter().map(|&v| gen_abt(v)).collect();
    docs.extend((1..5).map(gen_traingate));
    docs.extend((0..5).map(|s| gen_dpa(&DpaSpec::random(3, 3, 2, s)).unwrap()));
    docs.push(gen_timer(41, 43, 20));
    for doc in docs {
        assert_eq!(parse_model(&doc.to_string()).unwrap(), doc);
        let m = validate(&doc).unwrap();
        assert_eq!(validate(&m.to_document()).unwrap().to_string(), m.to_string());
    }
}

#[test]
fn dpa_generation_is_deterministic() {
    let a = gen_dpa(&DpaSpec::random(4, 4, 3, 17)).unwrap().to_string();
    let b = gen_dpa(&DpaSpec::random(4, 4, 3, 17)).unwrap().to_string();
    assert_eq!(a, b);
    assert_ne!(a, gen_dpa(&DpaSpec::random(4, 4, 3, 18)).unwrap().to_string());
}

#[test]
fn traingate_runs_respect_capacity() {
    let m = validate(&gen_traingate(4)).unwrap();
    let len = m.int_index("len").unwrap();
    for seed in 0..50 {
        let run = generate(&m, 200.0, seed);
        for (_, step) in run.segments() {
            let s = &step.state;
            let waiting: i64 = (0..4).map(|i| s.ints[m.int_index(&format!("wait{i}")).unwrap().0]).sum();
            assert_eq!(s.ints[len.0], waiting);
            let crossing = (0..4)
                .filter(|&i| {
                    m.location_name(m.component_index(&format!("Train{i}")).unwrap(), s.locations[i]) == "Cross"
                })
                .count();
            assert!(crossing <= 1);
        }
    }
}

#[test]
fn box_query_through_check() {
    let m = validate(&gen_abt(AbtVariant::Abt)).unwrap();
    let q = parse_query("Pr[time<=2]([] !T.T2)", &m).unwrap();
    assert_eq!(q.operator, Operator::Box);
    let mut held = 0;
    for seed in 0..200 {
        let run = generate(&m, 2.0, seed);
        held += u32::from(check(&m, &run, &q).unwrap().satisfied);
    }
    assert!(held > 100);
}
