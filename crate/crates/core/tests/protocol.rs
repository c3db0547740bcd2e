use crex::config::RunConfig;
use crex::encoding::Canonical;
use crex::error::{MixnetError, ProtocolError};
use crex::group::GroupPreset;
use crex::protocol::board::Phase;
use crex::protocol::messages::{PartitionScheme, KIND_MIX_OUTPUT_EXAMINERS, KIND_SCHEME};
use crex::protocol::transcript::{ExamTranscript, Record};
use crex::protocol::verify::verify_transcript;
use crex::protocol::{ExamRun, Faults, RubricId, Simulation};
use crex::schnorr::schnorr_verify;

fn config(n: usize, m: usize, k: usize, d: usize, seed: u64) -> RunConfig {
    RunConfig { n, m, k, d, seed, ..RunConfig::default() }
}

fn run(cfg: &RunConfig, faults: Faults) -> ExamRun {
    Simulation::run(cfg, faults).expect("run completes")
}

/// Marks each candidate should end up with, computed straight from their answers.
fn rubric_oracle(run: &ExamRun) -> Vec<Vec<Vec<u8>>> {
    run.candidate_pairs
        .iter()
        .map(|pairs| pairs.iter().map(|p| run.config.rubric.mark(&p.question, &p.answer)).collect())
        .collect()
}

#[test]
fn honest_default_run_passes_everything() {
    let r = run(&RunConfig::default(), Faults::none());
    assert!(r.rejections.is_empty(), "{:?}", r.rejections);
    assert!(r.all_candidates_verified(), "{:?}", r.candidate_verdicts);
    assert_eq!(r.registered_marks, rubric_oracle(&r));
    let verdict = verify_transcript(&r.transcript);
    assert!(verdict.all_pass(), "{:?}", verdict.failed());
}

#[test]
fn smallest_even_split_is_signed_by_both_examiners() {
    let r = run(&config(4, 2, 2, 2, 3), Faults::none());
    let scheme: PartitionScheme = r.board.find(KIND_SCHEME).unwrap().decode_payload(&r.params).unwrap();
    assert_eq!(scheme.subsets, vec![vec![0, 1], vec![2, 3]]);
    assert_eq!(scheme.examiner_signatures.len(), 2);
    let msg = scheme.signing_bytes(&r.params);
    for (e, sig) in r.examiners.iter().zip(&scheme.examiner_signatures) {
        assert!(schnorr_verify(&r.params, &e.keys.pk, &r.params.generator(), &msg, sig));
    }
}

#[test]
fn divergent_scheme_names_the_examiner() {
    for target in 0..3 {
        let faults = Faults { divergent_scheme_for: Some(target), ..Faults::none() };
        let err = Simulation::run(&config(6, 3, 2, 2, 4), faults).err().unwrap();
        assert_eq!(err, ProtocolError::CrossCheckFailure { examiner: target });
    }
}

#[test]
fn single_partition_is_valid() {
    let r = run(&config(3, 1, 2, 1, 5), Faults::none());
    assert!(r.all_candidates_verified());
    assert_eq!(r.registered_marks, rubric_oracle(&r));
}

#[test]
fn every_party_finds_its_pseudonym() {
    let mut sim = Simulation::new(&config(5, 2, 3, 2, 6), Faults::none()).unwrap();
    sim.run_through(Phase::Registration).unwrap();
    assert!(sim.candidates.iter().all(|c| c.pseudonym_index.is_some()));
    assert!(sim.examiners.iter().all(|e| e.pseudonym.is_some()));
    let mut positions: Vec<usize> = sim.candidates.iter().map(|c| c.pseudonym_index.unwrap()).collect();
    positions.sort();
    assert_eq!(positions, (0..5).collect::<Vec<_>>());
}

#[test]
fn biased_candidate_key_aborts_only_the_candidate_batch() {
    let faults = Faults { biased_candidate_key: Some(2), ..Faults::none() };
    let mut sim = Simulation::new(&config(5, 2, 3, 2, 7), faults).unwrap();
    let err = sim.run_through(Phase::Registration).unwrap_err();
    assert_eq!(
        err,
        ProtocolError::RegistrationAborted { batch: "candidates".into(), source: MixnetError::ValidationFailure(2) }
    );
    assert!(sim.board().find(KIND_MIX_OUTPUT_EXAMINERS).is_some());
    assert!(sim.candidate_mix().is_none());
    assert!(sim.examiner_mix().is_some());
}

#[test]
fn single_candidate_run() {
    let r = run(&config(1, 1, 2, 1, 8), Faults::none());
    assert!(r.all_candidates_verified());
    assert!(verify_transcript(&r.transcript).all_pass());
}

#[test]
fn tampered_test_fails_signature_check() {
    let faults = Faults { tamper_test_for: Some(0), ..Faults::none() };
    let err = Simulation::run(&config(3, 2, 2, 2, 9), faults).err().unwrap();
    assert_eq!(err, ProtocolError::BadSignature("question sheet".into()));
}

#[test]
fn outsiders_and_replays_are_rejected() {
    let faults = Faults {
        unregistered_submission: true,
        replay_submission: Some(1),
        wrong_subset_examiner: Some(0),
        wrong_generator_examiner: Some(1),
        unregistered_examiner: true,
        ..Faults::none()
    };
    let r = run(&config(4, 2, 2, 2, 10), faults);
    let mut expected = vec![
        ProtocolError::DuplicateSubmission,
        ProtocolError::UnregisteredPseudonym,
        ProtocolError::BadSignature("mark sheet".into()),
        ProtocolError::UnregisteredPseudonym,
    ];
    let wrong_subset = r.rejections.iter().filter(|e| matches!(e, ProtocolError::WrongSubset { .. })).count();
    assert_eq!(wrong_subset, 1);
    let mut others: Vec<_> =
        r.rejections.iter().filter(|e| !matches!(e, ProtocolError::WrongSubset { .. })).cloned().collect();
    others.sort_by_key(|e| e.to_string());
    expected.sort_by_key(|e| e.to_string());
    assert_eq!(others, expected);
    // the honest messages still go through
    assert!(r.all_candidates_verified());
    assert_eq!(r.registered_marks, rubric_oracle(&r));
    // replaying the checks shows exactly the rejected messages
    let verdict = verify_transcript(&r.transcript);
    let failed = verdict.failed();
    assert_eq!(failed.len(), 5, "{failed:?}");
    assert!(failed.iter().all(|name| name.starts_with("channel.")));
}

#[test]
fn receipts_bind_answers_and_alpha() {
    let r = run(&config(3, 2, 3, 2, 11), Faults::none());
    let c = &r.candidates[0];
    let receipt = c.receipt.as_ref().unwrap();
    let nym = c.pseudonym.as_ref().unwrap();
    let alpha_entry = r.board.find(crex::protocol::messages::KIND_ALPHA).unwrap();
    let alpha = alpha_entry.decode_payload::<crex::protocol::messages::AlphaReveal>(&r.params).unwrap().alpha;
    let ea_pk = r.transcript.board().unwrap().entries()[0]
        .decode_payload::<crex::protocol::messages::Announcement>(&r.params)
        .unwrap()
        .ea_pk;
    assert!(receipt.verify(&r.params, &ea_pk, &c.pairs, nym, &alpha));
    let mut altered = c.pairs.clone();
    altered[0].answer.push(b'x');
    assert!(!receipt.verify(&r.params, &ea_pk, &altered, nym, &alpha));
    let wrong = r.params.scalar_add(&alpha, &r.params.scalar_u64(1));
    assert!(!receipt.verify(&r.params, &ea_pk, &c.pairs, nym, &wrong));
}

#[test]
fn missing_examiner_leaves_marks_missing() {
    let faults = Faults { skip_examiner: Some(0), ..Faults::none() };
    let err = Simulation::run(&config(4, 2, 2, 2, 12), faults).err().unwrap();
    assert!(matches!(err, ProtocolError::MissingMarks(_)), "{err:?}");
}

#[test]
fn identity_shuffle_leaves_matrices_unchanged() {
    let faults = Faults { identity_shuffle: true, ..Faults::none() };
    let mut sim = Simulation::new(&config(4, 2, 3, 2, 13), faults).unwrap();
    sim.run_through(Phase::Marking).unwrap();
    let shuffled = sim.shuffled().unwrap().clone();
    assert_eq!(shuffled, sim.ea.answer_matrix(4).unwrap());
    sim.run_through(Phase::Notification).unwrap();
    let r = sim.finish();
    assert_eq!(r.mark_matrices.marks, r.mark_matrices.shuffled);
    assert_eq!(r.registered_marks, rubric_oracle(&r));
}

#[test]
fn two_by_two_toy_rubric_end_to_end() {
    for seed in 0..20 {
        let cfg = RunConfig { rubric: RubricId::Length, ..config(2, 2, 2, 2, seed) };
        let r = run(&cfg, Faults::none());
        assert_eq!(r.registered_marks, rubric_oracle(&r), "seed {seed}");
        assert!(r.all_candidates_verified());
    }
}

#[test]
fn swapped_notifications_are_detected() {
    let faults = Faults { swap_notifications: Some((0, 1)), ..Faults::none() };
    let r = run(&config(4, 2, 3, 2, 14), faults);
    let mut failing = 0;
    for (c, v) in r.candidates.iter().zip(&r.candidate_verdicts) {
        let hit = matches!(c.pseudonym_index, Some(0 | 1));
        assert_eq!(v.get("sources-match-own-pairs"), Some(!hit), "{v:?}");
        failing += usize::from(!v.all_pass());
    }
    assert_eq!(failing, 2);
}

#[test]
fn forged_examiner_signature_is_detected() {
    let faults = Faults { forge_sheet_signature: Some(2), ..Faults::none() };
    let r = run(&config(4, 2, 3, 2, 15), faults);
    for (c, v) in r.candidates.iter().zip(&r.candidate_verdicts) {
        let hit = c.pseudonym_index == Some(2);
        assert_eq!(v.get("examiner-signatures"), Some(!hit));
        assert_eq!(v.all_pass(), !hit);
    }
}

#[test]
fn shared_labels_are_marked_once() {
    let r = run(&config(6, 3, 2, 2, 16), Faults::none());
    assert!(r.rejections.is_empty());
    assert!(r.redundant_sheets > 0);
    assert!(r.all_candidates_verified());
    assert!(verify_transcript(&r.transcript).all_pass());
}

#[test]
fn board_never_shows_marks_in_the_clear() {
    let r = run(&config(5, 3, 4, 3, 17), Faults::none());
    assert_eq!(verify_transcript(&r.transcript).get("privacy.no-plaintext-marks"), Some(true));
    // and the scan does find marks when they leak
    let mut t = r.transcript.clone();
    if let Some(Record::Board { entry, .. }) = t.records.iter_mut().rev().find(|r| matches!(r, Record::Board { .. })) {
        entry.payload.extend_from_slice(b"mark:3");
    }
    assert_eq!(verify_transcript(&t).get("privacy.no-plaintext-marks"), Some(false));
}

#[test]
fn transcripts_are_deterministic_and_replayable() {
    let cfg = config(4, 2, 3, 2, 18);
    let a = run(&cfg, Faults::none()).transcript.to_jsonl();
    let b = run(&cfg, Faults::none()).transcript.to_jsonl();
    assert_eq!(a, b);
    let c = run(&config(4, 2, 3, 2, 19), Faults::none()).transcript.to_jsonl();
    assert_ne!(a, c);
    let parsed = ExamTranscript::from_jsonl(&a).unwrap();
    assert_eq!(parsed.to_jsonl(), a);
    assert_eq!(verify_transcript(&parsed), verify_transcript(&parsed));
    assert!(verify_transcript(&parsed).all_pass());
}

#[test]
fn flipped_signature_byte_fails_only_that_check() {
    let r = run(&config(3, 2, 2, 2, 20), Faults::none());
    let baseline = verify_transcript(&r.transcript);
    let mut t = r.transcript.clone();
    let Some(Record::Board { entry, .. }) =
        t.records.iter_mut().find(|rec| matches!(rec, Record::Board { entry, .. } if entry.kind == "shuffled-answers"))
    else {
        panic!("no shuffled matrix")
    };
    let seq = entry.seq;
    let sig = entry.signature.as_mut().unwrap();
    let last = sig.len() - 1;
    sig[last] ^= 0x01;
    let reparsed = ExamTranscript::from_jsonl(&t.to_jsonl()).unwrap();
    let verdict = verify_transcript(&reparsed);
    assert_eq!(verdict.failed(), vec![format!("board.signature#{seq}").as_str()]);
    assert_eq!(verdict.checks.len(), baseline.checks.len());
}

#[test]
fn larger_groups_run_too() {
    let cfg = RunConfig { group: GroupPreset::Test64, ..config(3, 2, 2, 2, 21) };
    let r = run(&cfg, Faults::none());
    assert!(r.all_candidates_verified());
    assert!(verify_transcript(&r.transcript).all_pass());
}

#[test]
fn modp2048_smoke() {
    let cfg = RunConfig { group: GroupPreset::Modp2048, mix_servers: 1, ..config(2, 1, 2, 1, 22) };
    let r = run(&cfg, Faults::none());
    assert!(r.all_candidates_verified());
    assert_eq!(r.registered_marks, rubric_oracle(&r));
}

#[test]
fn transcript_records_parse_back_identically() {
    let r = run(&config(3, 2, 2, 2, 23), Faults::none());
    let text = r.transcript.to_jsonl();
    let back = ExamTranscript::from_jsonl(&text).unwrap();
    assert_eq!(back, r.transcript);
    let board = back.board().unwrap();
    assert_eq!(board, r.board);
    for e in board.entries() {
        assert_eq!(crex::protocol::BoardEntry::from_canonical(&r.params, &e.to_canonical(&r.params)).unwrap(), *e);
    }
}
