//! Coercion games.
//!
//! A coercer obtains a party's real secret key before notification and
//! receives evidence about what the party did. [`coercer_check`] runs every
//! check the coercer can run against the public board; the games compare
//! the check vectors produced by real and fabricated evidence.

use rand::seq::SliceRandom;
use rand::{Rng, RngCore};
use serde::Serialize;

use crate::config::RunConfig;
use crate::elgamal::decrypt;
use crate::encoding::Canonical;
use crate::error::{CoercionError, ProtocolError};
use crate::group::{GroupElement, GroupParams, Scalar};
use crate::protocol::board::{BulletinBoard, Phase, AUTHOR_EA};
use crate::protocol::matrix::{AnswerMatrix, QaPair};
use crate::protocol::messages::{MarkSheet, QuestionSheet, Signed, Submission, KIND_TEST};
use crate::protocol::simulation::{Faults, PairList, Simulation};
use crate::protocol::transcript::ExamTranscript;
use crate::rng::RngFactory;
use crate::protocol::verify::PublicView;
use crate::protocol::RubricId;

/// Board kind used by the stub of a design that publishes each answered
/// test next to its pseudonym.
pub const KIND_PUBLISHED_ANSWERS: &str = "published-answers";

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Claim {
    /// The test the candidate claims to have written, one pair per row.
    Test(Vec<QaPair>),
    /// The label the examiner claims to have marked, with the sheets.
    Marking { label: usize, sheets: Vec<MarkSheet> },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoercionEvidence {
    pub revealed_sk: Scalar,
    pub claim: Claim,
    /// Sequence numbers of the board entries the claim refers to.
    pub board_refs: Vec<u64>,
}

/// What a coerced candidate knows.
#[derive(Debug, Clone)]
pub struct CandidateSecrets {
    pub sk: Scalar,
    pub pairs: Vec<QaPair>,
}

/// What a coerced examiner knows.
#[derive(Debug, Clone)]
pub struct ExaminerSecrets {
    pub sk: Scalar,
    pub pseudonym: GroupElement,
    pub label: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Consistent,
    Inconsistent,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CoercerVerdict {
    /// `(check name, passed)` in a fixed order.
    pub checks: Vec<(String, bool)>,
    pub verdict: Verdict,
    pub reason: Option<String>,
}

impl CoercerVerdict {
    fn from_checks(checks: Vec<(String, bool)>) -> Self {
        let failed: Vec<&str> = checks.iter().filter(|(_, ok)| !ok).map(|(n, _)| n.as_str()).collect();
        let (verdict, reason) = if failed.is_empty() {
            (Verdict::Consistent, None)
        } else {
            (Verdict::Inconsistent, Some(failed.join(",")))
        };
        CoercerVerdict { checks, verdict, reason }
    }

    pub fn is_consistent(&self) -> bool {
        self.verdict == Verdict::Consistent
    }

    pub fn vector(&self) -> Vec<bool> {
        self.checks.iter().map(|(_, ok)| *ok).collect()
    }
}

/// Hands the party's key to the coercer, which the threat model only allows
/// before notification.
pub fn pre_notification_reveal(sk: &Scalar, phase_clock: Phase) -> Result<Scalar, CoercionError> {
    if phase_clock >= Phase::Notification {
        return Err(CoercionError::PhaseError(phase_clock.name().to_string()));
    }
    Ok(sk.clone())
}

fn refs(board: &BulletinBoard, kinds: &[&str]) -> Vec<u64> {
    board.entries().iter().filter(|e| kinds.contains(&e.kind.as_str())).map(|e| e.seq).collect()
}

/// The candidate's real test as evidence.
pub fn honest_candidate_evidence(secrets: &CandidateSecrets, board: &BulletinBoard) -> CoercionEvidence {
    CoercionEvidence {
        revealed_sk: secrets.sk.clone(),
        claim: Claim::Test(secrets.pairs.clone()),
        board_refs: refs(board, &["shuffled-answers"]),
    }
}

/// Real key plus a test assembled by picking one pair uniformly from every
/// row of the shuffled matrix.
pub fn coerce_candidate<R: RngCore + ?Sized>(
    secrets: &CandidateSecrets,
    shuffled: &AnswerMatrix,
    board: &BulletinBoard,
    rng: &mut R,
) -> CoercionEvidence {
    let pairs = shuffled.rows().iter().map(|row| row.choose(rng).expect("rows are non-empty").clone()).collect();
    CoercionEvidence {
        revealed_sk: secrets.sk.clone(),
        claim: Claim::Test(pairs),
        board_refs: refs(board, &["shuffled-answers"]),
    }
}

fn grade(
    scheme_subset: &[usize],
    shuffled: &AnswerMatrix,
    label: usize,
    pseudonym: &GroupElement,
    rubric: RubricId,
) -> Vec<MarkSheet> {
    scheme_subset
        .iter()
        .map(|&c| MarkSheet {
            column: c,
            label,
            pseudonym: pseudonym.clone(),
            marks: shuffled.column(c).iter().map(|p| rubric.mark_pair(p)).collect(),
        })
        .collect()
}

/// The examiner's real label and marks as evidence.
pub fn honest_examiner_evidence(
    secrets: &ExaminerSecrets,
    subsets: &[Vec<usize>],
    shuffled: &AnswerMatrix,
    rubric: RubricId,
    board: &BulletinBoard,
) -> CoercionEvidence {
    CoercionEvidence {
        revealed_sk: secrets.sk.clone(),
        claim: Claim::Marking {
            label: secrets.label,
            sheets: grade(&subsets[secrets.label], shuffled, secrets.label, &secrets.pseudonym, rubric),
        },
        board_refs: refs(board, &["partition-scheme", "shuffled-answers", "assignment"]),
    }
}

/// Real key plus a claim of having marked `decoy_label`, graded locally
/// from the public shuffled matrix and never sent to the authority.
pub fn coerce_examiner(
    secrets: &ExaminerSecrets,
    subsets: &[Vec<usize>],
    shuffled: &AnswerMatrix,
    decoy_label: usize,
    rubric: RubricId,
    board: &BulletinBoard,
) -> Result<CoercionEvidence, CoercionError> {
    if decoy_label >= subsets.len() {
        return Err(CoercionError::UnknownLabel(decoy_label));
    }
    if decoy_label == secrets.label {
        return Err(CoercionError::DecoyIsAssigned(decoy_label));
    }
    Ok(CoercionEvidence {
        revealed_sk: secrets.sk.clone(),
        claim: Claim::Marking {
            label: decoy_label,
            sheets: grade(&subsets[decoy_label], shuffled, decoy_label, &secrets.pseudonym, rubric),
        },
        board_refs: refs(board, &["partition-scheme", "shuffled-answers", "assignment"]),
    })
}

/// Every check a coercer can run with the revealed key and the public board.
pub fn coercer_check(params: &GroupParams, evidence: &CoercionEvidence, board: &BulletinBoard) -> CoercerVerdict {
    let view = PublicView::read(params, board);
    let pk = params.exp_g(&evidence.revealed_sk);
    let mut checks = Vec::new();
    let mut push = |name: &str, ok: bool| checks.push((name.to_string(), ok));
    let refs_ok = evidence.board_refs.iter().all(|&s| (s as usize) < board.len());

    match &evidence.claim {
        Claim::Test(pairs) => {
            let registered = view.announcement.as_ref().is_some_and(|a| a.candidate_pks.contains(&pk));
            push("sk-registered", registered);
            let nym = view.out_c.as_ref().map(|o| (params.exp(o.h(), &evidence.revealed_sk), o));
            push("pseudonym-registered", nym.as_ref().is_some_and(|(p, o)| o.position(p).is_some()));
            push("board-refs", refs_ok);
            let in_rows = view.shuffled.as_ref().is_some_and(|t| {
                pairs.len() == t.k() && pairs.iter().enumerate().all(|(i, p)| t.row(i).contains(p))
            });
            push("pairs-in-rows", in_rows);
            // the revealed key opens the test addressed to its pseudonym
            let questions_ok = match (&nym, &view.announcement) {
                (Some((p, o)), Some(a)) => board
                    .find_all(KIND_TEST)
                    .filter_map(|e| e.decode_payload::<crate::protocol::messages::AddressedCiphertext>(params).ok())
                    .filter(|t| &t.pseudonym == p)
                    .filter_map(|t| decrypt(params, &evidence.revealed_sk, o.h(), &t.ciphertext).ok())
                    .filter_map(|b| Signed::<QuestionSheet>::from_canonical(params, &b).ok())
                    .any(|s| {
                        s.verify(params, &a.ea_pk, &params.generator())
                            && s.body.questions.len() == pairs.len()
                            && s.body.questions.iter().zip(pairs).all(|(q, p)| q == &p.question)
                    }),
                _ => false,
            };
            push("questions-match-test", questions_ok);
            // only possible on boards that publish answers next to pseudonyms
            if board.find(KIND_PUBLISHED_ANSWERS).is_some() {
                let linked = nym.as_ref().and_then(|(p, _)| {
                    board
                        .find_all(KIND_PUBLISHED_ANSWERS)
                        .filter_map(|e| e.decode_payload::<Submission>(params).ok())
                        .find(|s| &s.pseudonym == p)
                });
                push("linked-answers-match", linked.is_some_and(|s| &s.pairs == pairs));
            }
        }
        Claim::Marking { label, sheets } => {
            let registered = view.announcement.as_ref().is_some_and(|a| a.examiner_pks.contains(&pk));
            push("sk-registered", registered);
            let nym = view.out_e.as_ref().map(|o| (params.exp(o.h(), &evidence.revealed_sk), o));
            push("pseudonym-registered", nym.as_ref().is_some_and(|(p, o)| o.position(p).is_some()));
            push("board-refs", refs_ok);
            let label_ok = view.scheme.as_ref().is_some_and(|s| *label < s.d())
                && view.assignment.as_ref().is_some_and(|a| a.entries.iter().any(|&(_, l)| l == *label));
            push("label-assigned-on-board", label_ok);
            let well_formed = match (&view.scheme, &view.shuffled) {
                (Some(s), Some(t)) if *label < s.d() => {
                    let mut cols: Vec<usize> = sheets.iter().map(|x| x.column).collect();
                    cols.sort_unstable();
                    let mut want = s.subsets[*label].clone();
                    want.sort_unstable();
                    cols == want && sheets.iter().all(|x| x.marks.len() == t.k() && x.label == *label)
                }
                _ => false,
            };
            push("marks-well-formed", well_formed);
        }
    }
    CoercerVerdict::from_checks(checks)
}

/// A stronger examiner-side check: recompute the pseudonym from the revealed
/// key and read its label off the published assignment. `Some(true)` iff the
/// claimed label matches.
pub fn assignment_lookup(params: &GroupParams, evidence: &CoercionEvidence, board: &BulletinBoard) -> Option<bool> {
    let Claim::Marking { label, .. } = &evidence.claim else { return None };
    let view = PublicView::read(params, board);
    let nym = params.exp(view.out_e?.h(), &evidence.revealed_sk);
    Some(view.assignment?.label_for(&nym)? == *label)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ClaimSummary {
    Test { pairs: Vec<[String; 2]> },
    Marking { label: usize, columns: Vec<usize>, marks: Vec<Vec<String>> },
}

/// Printable form of a piece of evidence.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EvidenceSummary {
    pub revealed_pk: String,
    pub claim: ClaimSummary,
    pub board_refs: Vec<u64>,
}

impl EvidenceSummary {
    pub fn new(params: &GroupParams, evidence: &CoercionEvidence) -> Self {
        let text = |b: &[u8]| String::from_utf8_lossy(b).into_owned();
        let claim = match &evidence.claim {
            Claim::Test(pairs) => ClaimSummary::Test {
                pairs: pairs.iter().map(|p| [text(&p.question), text(&p.answer)]).collect(),
            },
            Claim::Marking { label, sheets } => ClaimSummary::Marking {
                label: *label,
                columns: sheets.iter().map(|s| s.column).collect(),
                marks: sheets.iter().map(|s| s.marks.iter().map(|m| text(m)).collect()).collect(),
            },
        };
        EvidenceSummary {
            revealed_pk: hex::encode(params.element_to_bytes(&params.exp_g(&evidence.revealed_sk))),
            claim,
            board_refs: evidence.board_refs.clone(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct GameOutcome {
    pub party: usize,
    pub real_evidence: EvidenceSummary,
    pub fake_evidence: EvidenceSummary,
    pub real: CoercerVerdict,
    pub fake: CoercerVerdict,
    /// Whether the fabricated claim differs from the real one.
    pub fake_differs: bool,
}

impl GameOutcome {
    fn new(
        params: &GroupParams,
        party: usize,
        real: &CoercionEvidence,
        fake: &CoercionEvidence,
        board: &BulletinBoard,
    ) -> Self {
        GameOutcome {
            party,
            real_evidence: EvidenceSummary::new(params, real),
            fake_evidence: EvidenceSummary::new(params, fake),
            fake_differs: fake.claim != real.claim,
            real: coercer_check(params, real, board),
            fake: coercer_check(params, fake, board),
        }
    }

    /// The coercer's observations are identical for both kinds of evidence.
    pub fn indistinguishable(&self) -> bool {
        self.real.checks == self.fake.checks && self.real.verdict == self.fake.verdict
    }
}

fn run_to_marking(config: &RunConfig) -> Result<Simulation, CoercionError> {
    let mut sim = Simulation::new(config, Faults::none())?;
    sim.run_through(Phase::Marking)?;
    Ok(sim)
}

/// One seeded candidate game on a fresh exam, coerced during marking.
pub fn candidate_game(config: &RunConfig) -> Result<GameOutcome, CoercionError> {
    let sim = run_to_marking(config)?;
    let mut rng = sim.fork_rng("coercion/candidate");
    let party = rng.gen_range(0..config.n);
    let c = &sim.candidates[party];
    let sk = pre_notification_reveal(&c.keys.sk, sim.phase().expect("started"))?;
    let secrets = CandidateSecrets { sk, pairs: c.pairs.clone() };
    let shuffled = sim.shuffled().expect("marking done");
    let view = sim.board().before(Phase::Notification);
    let real = honest_candidate_evidence(&secrets, &view);
    let fake = coerce_candidate(&secrets, shuffled, &view, &mut rng);
    Ok(GameOutcome::new(sim.params(), party, &real, &fake, &view))
}

/// One seeded examiner game; the decoy label is drawn uniformly from the
/// labels other than the assigned one.
pub fn examiner_game(config: &RunConfig) -> Result<GameOutcome, CoercionError> {
    let sim = run_to_marking(config)?;
    let mut rng = sim.fork_rng("coercion/examiner");
    let party = rng.gen_range(0..config.m);
    let e = &sim.examiners[party];
    let label = e.label.expect("assignment read");
    let decoys: Vec<usize> = (0..config.d).filter(|&l| l != label).collect();
    let decoy = *decoys.choose(&mut rng).ok_or(CoercionError::DecoyIsAssigned(label))?;
    let sk = pre_notification_reveal(&e.keys.sk, sim.phase().expect("started"))?;
    let secrets = ExaminerSecrets { sk, pseudonym: e.pseudonym.clone().expect("located"), label };
    let scheme = sim.scheme().expect("pre-assignment done");
    let shuffled = sim.shuffled().expect("marking done");
    let view = sim.board().before(Phase::Notification);
    let real = honest_examiner_evidence(&secrets, &scheme.subsets, shuffled, config.rubric, &view);
    let fake = coerce_examiner(&secrets, &scheme.subsets, shuffled, decoy, config.rubric, &view)?;
    Ok(GameOutcome::new(sim.params(), party, &real, &fake, &view))
}

/// Copy of the pre-notification board with every accepted test published
/// in the clear next to its pseudonym.
pub fn published_answers_board(sim: &Simulation) -> Result<BulletinBoard, CoercionError> {
    let params = sim.params();
    let mut board = sim.board().before(Phase::Notification);
    let out_c = sim.candidate_mix().ok_or_else(|| CoercionError::PhaseError("registration".into()))?;
    let t = sim.ea.answer_matrix(sim.config().n)?;
    for (j, pairs) in t.columns().into_iter().enumerate() {
        let body = Submission { pseudonym: out_c.pseudonyms()[j].clone(), pairs };
        board.post(Phase::Marking, AUTHOR_EA, KIND_PUBLISHED_ANSWERS, body.to_canonical(params));
    }
    Ok(board)
}

/// Candidate game against a board that links answers to pseudonyms. The
/// fabricated test is redrawn until it differs from the real one, so the
/// outcome shows whether the coercer can tell them apart.
pub fn published_answers_game(config: &RunConfig) -> Result<GameOutcome, CoercionError> {
    if config.n < 2 {
        return Err(CoercionError::Protocol(ProtocolError::Config(crate::error::ConfigError::Invalid(
            "a fabricated test needs at least two candidates".into(),
        ))));
    }
    let sim = run_to_marking(config)?;
    let mut rng = sim.fork_rng("coercion/published-answers");
    let party = rng.gen_range(0..config.n);
    let c = &sim.candidates[party];
    let sk = pre_notification_reveal(&c.keys.sk, sim.phase().expect("started"))?;
    let secrets = CandidateSecrets { sk, pairs: c.pairs.clone() };
    let board = published_answers_board(&sim)?;
    let shuffled = sim.shuffled().expect("marking done");
    let real = honest_candidate_evidence(&secrets, &board);
    let fake = loop {
        let f = coerce_candidate(&secrets, shuffled, &board, &mut rng);
        if f.claim != real.claim {
            break f;
        }
    };
    Ok(GameOutcome::new(sim.params(), party, &real, &fake, &board))
}

/// Failure to set up a game from a recorded exam.
#[derive(Debug, thiserror::Error)]
pub enum TranscriptGameError {
    #[error("transcript: {0}")]
    Transcript(String),
    #[error(transparent)]
    Coercion(#[from] CoercionError),
}

fn transcript_view(t: &ExamTranscript) -> Result<(GroupParams, BulletinBoard, PublicView), TranscriptGameError> {
    let params = t.params();
    let board = t.board().map_err(TranscriptGameError::Transcript)?.before(Phase::Notification);
    let view = PublicView::read(&params, &board);
    Ok((params, board, view))
}

fn transcript_sk(t: &ExamTranscript, role: &str) -> Result<Scalar, TranscriptGameError> {
    let rec = t.secret(role).ok_or_else(|| TranscriptGameError::Transcript(format!("no secret record for {role}")))?;
    // the recorded exam is replayed as if coerced during marking
    Ok(pre_notification_reveal(&rec.sk, Phase::Marking)?)
}

/// Candidate game replayed from a recorded exam that carries secret records.
pub fn candidate_game_from_transcript(t: &ExamTranscript, index: usize) -> Result<GameOutcome, TranscriptGameError> {
    let (params, board, view) = transcript_view(t)?;
    let role = format!("candidate-{index}");
    let sk = transcript_sk(t, &role)?;
    let memo = &t.secret(&role).expect("checked above").memo;
    let pairs = PairList::from_canonical(&params, memo)
        .map_err(|e| TranscriptGameError::Transcript(format!("{role} memo: {e}")))?
        .0;
    let shuffled = view.shuffled.ok_or_else(|| TranscriptGameError::Transcript("no shuffled matrix".into()))?;
    let secrets = CandidateSecrets { sk, pairs };
    let mut rng = RngFactory::new(t.header.config.seed).fork_indexed("coercion/transcript/candidate", index);
    let real = honest_candidate_evidence(&secrets, &board);
    let fake = coerce_candidate(&secrets, &shuffled, &board, &mut rng);
    Ok(GameOutcome::new(&params, index, &real, &fake, &board))
}

/// Examiner game replayed from a recorded exam; `decoy` is the label the
/// examiner claims instead of the real one.
pub fn examiner_game_from_transcript(
    t: &ExamTranscript,
    index: usize,
    decoy: usize,
) -> Result<GameOutcome, TranscriptGameError> {
    let (params, board, view) = transcript_view(t)?;
    let sk = transcript_sk(t, &format!("examiner-{index}"))?;
    let missing = |what: &str| TranscriptGameError::Transcript(format!("no {what} on the board"));
    let out_e = view.out_e.ok_or_else(|| missing("examiner mix output"))?;
    let scheme = view.scheme.ok_or_else(|| missing("partition scheme"))?;
    let shuffled = view.shuffled.ok_or_else(|| missing("shuffled matrix"))?;
    let assignment = view.assignment.ok_or_else(|| missing("assignment"))?;
    let pseudonym = params.exp(out_e.h(), &sk);
    let label = assignment.label_for(&pseudonym).ok_or_else(|| missing("assignment for this examiner"))?;
    let secrets = ExaminerSecrets { sk, pseudonym, label };
    let rubric = t.header.config.rubric;
    let real = honest_examiner_evidence(&secrets, &scheme.subsets, &shuffled, rubric, &board);
    let fake = coerce_examiner(&secrets, &scheme.subsets, &shuffled, decoy, rubric, &board)?;
    Ok(GameOutcome::new(&params, index, &real, &fake, &board))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(seed: u64) -> RunConfig {
        RunConfig { n: 3, m: 2, k: 2, d: 2, seed, ..RunConfig::default() }
    }

    #[test]
    fn reveal_is_gated_by_phase() {
        let params = GroupParams::preset(crate::group::GroupPreset::Test16);
        let sk = params.scalar_u64(5);
        assert_eq!(pre_notification_reveal(&sk, Phase::Marking).unwrap(), sk);
        assert_eq!(
            pre_notification_reveal(&sk, Phase::Notification),
            Err(CoercionError::PhaseError("notification".into()))
        );
    }

    #[test]
    fn fabricated_test_takes_one_pair_per_row() {
        let sim = run_to_marking(&cfg(1)).unwrap();
        let c = &sim.candidates[0];
        let secrets = CandidateSecrets { sk: c.keys.sk.clone(), pairs: c.pairs.clone() };
        let t = sim.shuffled().unwrap();
        let mut rng = sim.fork_rng("t");
        let ev = coerce_candidate(&secrets, t, sim.board(), &mut rng);
        let Claim::Test(pairs) = ev.claim else { panic!() };
        assert_eq!(pairs.len(), 2);
        for (i, p) in pairs.iter().enumerate() {
            assert!(t.row(i).contains(p));
        }
        assert_eq!(ev.revealed_sk, c.keys.sk);
    }

    #[test]
    fn decoy_must_differ_and_exist() {
        let sim = run_to_marking(&cfg(2)).unwrap();
        let e = &sim.examiners[0];
        let label = e.label.unwrap();
        let secrets = ExaminerSecrets { sk: e.keys.sk.clone(), pseudonym: e.pseudonym.clone().unwrap(), label };
        let subsets = &sim.scheme().unwrap().subsets;
        let t = sim.shuffled().unwrap();
        assert_eq!(
            coerce_examiner(&secrets, subsets, t, label, RubricId::Digest, sim.board()),
            Err(CoercionError::DecoyIsAssigned(label))
        );
        assert_eq!(
            coerce_examiner(&secrets, subsets, t, 7, RubricId::Digest, sim.board()),
            Err(CoercionError::UnknownLabel(7))
        );
        let decoy = 1 - label;
        let ev = coerce_examiner(&secrets, subsets, t, decoy, RubricId::Digest, sim.board()).unwrap();
        let Claim::Marking { label: l, sheets } = &ev.claim else { panic!() };
        assert_eq!(*l, decoy);
        assert_eq!(sheets.len(), subsets[decoy].len());
        assert!(coercer_check(sim.params(), &ev, sim.board()).is_consistent());
        assert_eq!(assignment_lookup(sim.params(), &ev, sim.board()), Some(false));
    }

    #[test]
    fn absent_pair_is_inconsistent() {
        let sim = run_to_marking(&cfg(3)).unwrap();
        let c = &sim.candidates[1];
        let mut pairs = c.pairs.clone();
        pairs[0].answer = b"never written".to_vec();
        let ev = CoercionEvidence { revealed_sk: c.keys.sk.clone(), claim: Claim::Test(pairs), board_refs: vec![] };
        let v = coercer_check(sim.params(), &ev, sim.board());
        assert_eq!(v.verdict, Verdict::Inconsistent);
        assert_eq!(v.reason.as_deref(), Some("pairs-in-rows"));
    }

    #[test]
    fn games_are_consistent() {
        for seed in 0..5 {
            let g = candidate_game(&cfg(seed)).unwrap();
            assert!(g.real.is_consistent() && g.fake.is_consistent());
            assert!(g.indistinguishable());
            let g = examiner_game(&cfg(seed)).unwrap();
            assert!(g.fake.is_consistent() && g.indistinguishable());
            let g = published_answers_game(&cfg(seed)).unwrap();
            assert!(g.real.is_consistent() && !g.fake.is_consistent());
        }
    }

    #[test]
    fn transcript_replay() {
        let run = Simulation::run(&cfg(9), Faults::none()).unwrap();
        let g = candidate_game_from_transcript(&run.transcript, 1).unwrap();
        assert!(g.indistinguishable() && g.real.is_consistent());
        let label = run.examiners[0].label.unwrap();
        let g = examiner_game_from_transcript(&run.transcript, 0, 1 - label).unwrap();
        assert!(g.indistinguishable());
        assert!(matches!(
            examiner_game_from_transcript(&run.transcript, 0, label),
            Err(TranscriptGameError::Coercion(CoercionError::DecoyIsAssigned(_)))
        ));
        assert!(candidate_game_from_transcript(&run.transcript, 5).is_err());
    }
}
