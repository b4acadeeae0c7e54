use nptasmc::engine::{random_run, RunOptions};
use nptasmc::examples::{dpa_query, gen_dpa, gen_traingate, traingate_query, DpaSpec};
use nptasmc::hist::histogram;
use nptasmc::model::{validate, ClockId, NetworkModel};
use nptasmc::monitor::Outcome;
use nptasmc::rng::substream;
use nptasmc::sampler::{outcomes, satisfied, Jobs};
use nptasmc::stats::{estimate, EstimateParams};
use nptasmc::text::parse_query;

fn outcomes_of(m: &NetworkModel, q: &str, seed: u64, n: usize) -> Vec<Outcome> {
    let q = parse_query(q, m).unwrap();
    outcomes(m, &q, seed, Jobs::default(), RunOptions::default()).take(n).map(|r| r.unwrap()).collect()
}

#[test]
fn traingate_component_count() {
    let m = validate(&gen_traingate(6)).unwrap();
    assert_eq!(m.components.len(), 7);
}

#[test]
fn faster_train_crosses_earlier() {
    let m = validate(&gen_traingate(6)).unwrap();
    let p = EstimateParams { epsilon: 0.02, delta: 0.05 };
    let est = |train| {
        let q = parse_query(&traingate_query(train, 5), &m).unwrap();
        estimate(satisfied(outcomes(&m, &q, 21, Jobs::default(), RunOptions::default())), &p).unwrap().p_hat
    };
    let (p0, p5) = (est(0), est(5));
    assert!(p5 >= p0, "train 5: {p5}, train 0: {p0}");
}

#[test]
fn first_crossing_densities_cross() {
    // Train 5's first crossing is concentrated early, train 0's spreads later.
    let m = validate(&gen_traingate(6)).unwrap();
    let bins = 20;
    let h0 = histogram(&outcomes_of(&m, &traingate_query(0, 60), 3, 20_000), bins, 60.0);
    let h5 = histogram(&outcomes_of(&m, &traingate_query(5, 60), 4, 20_000), bins, 60.0);
    assert!(h5.frequencies[0] > h0.frequencies[0]);
    assert!((1..bins).any(|i| h0.frequencies[i] > h5.frequencies[i] + 0.005));
}

#[test]
fn shared_resource_serializes_chains() {
    let spec = DpaSpec {
        n: 2,
        k: 1,
        m: 1,
        capacities: vec![1],
        durations: vec![vec![(2, 4)], vec![(1, 3)]],
        demands: vec![vec![vec![1]], vec![vec![1]]],
        priority: vec![0, 1],
    };
    let m = validate(&gen_dpa(&spec).unwrap()).unwrap();
    let (s0, s1) = (m.component_index("S0").unwrap(), m.component_index("S1").unwrap());
    for seed in 0..200 {
        let run = random_run(&m, ClockId(0), 20.0, &mut substream(seed, 0)).unwrap();
        let when = |comp: usize, loc: &str| {
            run.steps
                .iter()
                .find(|s| m.location_name(comp, s.state.locations[comp]) == loc)
                .map(|s| s.state.clocks.get(ClockId(0)))
                .unwrap()
        };
        let done0 = when(s0, "Done");
        let start1 = when(s1, "B0");
        let done1 = when(s1, "Done");
        assert!(done0 >= 2.0 - 1e-9);
        assert!(start1 >= done0 - 1e-9, "second chain started at {start1} before {done0}");
        assert!(done1 >= 3.0 - 1e-9);
    }
}

#[test]
fn random_job_shop_simulates() {
    let spec = DpaSpec::random(4, 4, 3, 2);
    let m = validate(&gen_dpa(&spec).unwrap()).unwrap();
    let os = outcomes_of(&m, &dpa_query(4, 200), 5, 10_000);
    let done = os.iter().filter(|o| o.satisfied).count();
    assert!(done > 0);
}
