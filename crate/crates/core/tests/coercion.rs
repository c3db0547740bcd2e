use crex::coercion::{
    assignment_lookup, candidate_game, coerce_examiner, coercer_check, examiner_game, pre_notification_reveal,
    published_answers_board, published_answers_game, Claim, CoercionEvidence, ExaminerSecrets, Verdict,
};
use crex::config::RunConfig;
use crex::error::CoercionError;
use crex::protocol::board::Phase;
use crex::protocol::{Faults, RubricId, Simulation};

fn cfg(n: usize, m: usize, k: usize, d: usize, seed: u64) -> RunConfig {
    RunConfig { n, m, k, d, seed, ..RunConfig::default() }
}

#[test]
fn candidate_games_across_shapes() {
    for seed in 0..20 {
        let g = candidate_game(&cfg(2 + (seed as usize % 5), 2, 2 + (seed as usize % 3), 2, seed)).unwrap();
        assert_eq!(g.fake.verdict, Verdict::Consistent, "seed {seed}");
        assert_eq!(g.real.checks, g.fake.checks, "seed {seed}");
    }
}

#[test]
fn examiner_games_across_shapes() {
    for seed in 0..20 {
        let d = 2 + (seed as usize % 2);
        let g = examiner_game(&cfg(6, d + 1, 2, d, seed)).unwrap();
        assert!(g.fake.is_consistent(), "seed {seed}: {:?}", g.fake);
        assert!(g.fake_differs);
        assert!(g.indistinguishable());
    }
}

#[test]
fn single_partition_has_no_decoy() {
    let err = examiner_game(&cfg(3, 1, 2, 1, 1)).unwrap_err();
    assert!(matches!(err, CoercionError::DecoyIsAssigned(0)));
}

#[test]
fn reveal_after_notification_is_refused() {
    let mut sim = Simulation::new(&cfg(3, 2, 2, 2, 4), Faults::none()).unwrap();
    sim.run_through(Phase::Notification).unwrap();
    let sk = &sim.candidates[0].keys.sk;
    assert!(matches!(
        pre_notification_reveal(sk, sim.phase().unwrap()),
        Err(CoercionError::PhaseError(p)) if p == "notification"
    ));
}

#[test]
fn coercer_sees_nothing_past_marking() {
    let mut sim = Simulation::new(&cfg(4, 2, 2, 2, 5), Faults::none()).unwrap();
    sim.run_through(Phase::Notification).unwrap();
    let view = sim.board().before(Phase::Notification);
    assert!(view.entries().iter().all(|e| e.phase < Phase::Notification));
    assert!(view.len() < sim.board().len());
}

#[test]
fn published_answers_expose_the_real_test() {
    for seed in 0..10 {
        let g = published_answers_game(&cfg(4, 2, 3, 2, seed)).unwrap();
        assert!(g.real.is_consistent());
        assert_eq!(g.fake.verdict, Verdict::Inconsistent);
        assert_eq!(g.fake.reason.as_deref(), Some("linked-answers-match"));
    }
}

#[test]
fn published_answers_board_links_every_candidate() {
    let mut sim = Simulation::new(&cfg(3, 2, 2, 2, 6), Faults::none()).unwrap();
    sim.run_through(Phase::Marking).unwrap();
    let board = published_answers_board(&sim).unwrap();
    assert_eq!(board.find_all(crex::coercion::KIND_PUBLISHED_ANSWERS).count(), 3);
    for c in &sim.candidates {
        let ev = CoercionEvidence { revealed_sk: c.keys.sk.clone(), claim: Claim::Test(c.pairs.clone()), board_refs: vec![] };
        assert!(coercer_check(sim.params(), &ev, &board).is_consistent());
    }
}

/// The assignment is posted per pseudonym, so a coercer holding the
/// examiner's key can read the real label directly. The checks above do not
/// do that lookup; this test records what it reveals.
#[test]
fn assignment_lookup_exposes_decoy_labels() {
    let mut sim = Simulation::new(&cfg(6, 2, 2, 2, 7), Faults::none()).unwrap();
    sim.run_through(Phase::Marking).unwrap();
    let e = &sim.examiners[1];
    let label = e.label.unwrap();
    let secrets = ExaminerSecrets { sk: e.keys.sk.clone(), pseudonym: e.pseudonym.clone().unwrap(), label };
    let scheme = sim.scheme().unwrap();
    let board = sim.board().before(Phase::Notification);
    let fake = coerce_examiner(&secrets, &scheme.subsets, sim.shuffled().unwrap(), 1 - label, RubricId::Digest, &board)
        .unwrap();
    assert!(coercer_check(sim.params(), &fake, &board).is_consistent());
    assert_eq!(assignment_lookup(sim.params(), &fake, &board), Some(false));
}

#[test]
fn wrong_key_is_caught() {
    let mut sim = Simulation::new(&cfg(3, 2, 2, 2, 8), Faults::none()).unwrap();
    sim.run_through(Phase::Marking).unwrap();
    let c = &sim.candidates[0];
    let stranger = sim.params().scalar_u64(12345);
    let ev = CoercionEvidence { revealed_sk: stranger, claim: Claim::Test(c.pairs.clone()), board_refs: vec![] };
    let v = coercer_check(sim.params(), &ev, sim.board());
    assert_eq!(v.verdict, Verdict::Inconsistent);
    assert_eq!(v.checks[0], ("sk-registered".to_string(), false));
}
