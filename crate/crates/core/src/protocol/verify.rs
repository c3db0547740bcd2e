//! Named, independently evaluated checks over a board or a transcript.
//!
//! A failing check never stops later checks, so a corrupted record shows
//! up as exactly the checks that depend on it.

use std::collections::HashSet;

use serde::Serialize;

use crate::elgamal::decrypt;
use crate::encoding::Canonical;
use crate::group::{GroupElement, GroupParams, Scalar, HASH_NAME};
use crate::mixnet::{deanonymize, find_own_pseudonym, iremix_validate, verify_revealed_chain, MixInput, MixOutput};
use crate::schnorr::schnorr_verify;

use super::board::{BulletinBoard, Phase, AUTHOR_EA, AUTHOR_MIX_CANDIDATES, AUTHOR_MIX_EXAMINERS};
use super::matrix::{AnswerMatrix, QaPair};
use super::messages::*;
use super::roles::check_sheet;
use super::simulation::PairList;
use super::transcript::{ExamTranscript, Record};
use super::MARK_PREFIX;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct Checks {
    pub checks: Vec<Check>,
}

impl Checks {
    pub fn push(&mut self, name: impl Into<String>, passed: bool, detail: impl Into<String>) -> bool {
        self.checks.push(Check { name: name.into(), passed, detail: detail.into() });
        passed
    }

    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failed(&self) -> Vec<&str> {
        self.checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect()
    }

    pub fn get(&self, name: &str) -> Option<bool> {
        self.checks.iter().find(|c| c.name == name).map(|c| c.passed)
    }

    pub fn passed_count(&self) -> usize {
        self.checks.iter().filter(|c| c.passed).count()
    }
}

pub type CandidateVerdict = Checks;
pub type TranscriptVerdict = Checks;

/// Names of the checks a candidate runs after notification, in order.
pub const CANDIDATE_CHECKS: [&str; 9] = [
    "pseudonym",
    "test-sheet",
    "notification-decrypts",
    "ea-signature",
    "addressed-to-self",
    "sources-match-own-pairs",
    "examiner-signatures",
    "marks-match-sheets",
    "receipt",
];

pub fn decode_kind<T: Canonical>(params: &GroupParams, board: &BulletinBoard, kind: &str) -> Option<T> {
    board.find(kind).and_then(|e| e.decode_payload(params).ok())
}

/// Public data every party reads off the board.
pub struct PublicView {
    pub announcement: Option<Announcement>,
    pub scheme: Option<PartitionScheme>,
    pub input_c: Option<MixInput>,
    pub input_e: Option<MixInput>,
    pub out_c: Option<MixOutput>,
    pub out_e: Option<MixOutput>,
    pub shuffled: Option<AnswerMatrix>,
    pub assignment: Option<Assignment>,
    pub alpha: Option<Scalar>,
}

impl PublicView {
    pub fn read(params: &GroupParams, board: &BulletinBoard) -> Self {
        PublicView {
            announcement: decode_kind(params, board, KIND_ANNOUNCEMENT),
            scheme: decode_kind(params, board, KIND_SCHEME),
            input_c: decode_kind(params, board, KIND_MIX_INPUT_CANDIDATES),
            input_e: decode_kind(params, board, KIND_MIX_INPUT_EXAMINERS),
            out_c: decode_kind(params, board, KIND_MIX_OUTPUT_CANDIDATES),
            out_e: decode_kind(params, board, KIND_MIX_OUTPUT_EXAMINERS),
            shuffled: decode_kind(params, board, KIND_SHUFFLED),
            assignment: decode_kind(params, board, KIND_ASSIGNMENT),
            alpha: decode_kind::<AlphaReveal>(params, board, KIND_ALPHA).map(|a| a.alpha),
        }
    }
}

fn addressed_to<'a>(
    params: &'a GroupParams,
    board: &'a BulletinBoard,
    kind: &'a str,
    nym: &'a GroupElement,
) -> impl Iterator<Item = AddressedCiphertext> + 'a {
    board
        .find_all(kind)
        .filter_map(move |e| e.decode_payload::<AddressedCiphertext>(params).ok())
        .filter(move |a| &a.pseudonym == nym)
}

/// The candidate's end-of-exam verification: locate the own pseudonym,
/// open the test and the notification, and check every signature, the
/// mark provenance and the receipt.
pub fn candidate_verify(
    params: &GroupParams,
    board: &BulletinBoard,
    sk: &Scalar,
    pairs: &[QaPair],
    receipt: Option<&Receipt>,
) -> CandidateVerdict {
    let mut v = Checks::default();
    let view = PublicView::read(params, board);
    let skip = |v: &mut Checks, from: usize| {
        for name in &CANDIDATE_CHECKS[from..] {
            v.push(*name, false, "not reached");
        }
    };

    let (Some(ann), Some(out_c)) = (&view.announcement, &view.out_c) else {
        v.push("pseudonym", false, "board lacks announcement or candidate mix output");
        skip(&mut v, 1);
        return v;
    };
    let Ok(pos) = find_own_pseudonym(params, sk, out_c) else {
        v.push("pseudonym", false, "no pseudonym matches the key");
        skip(&mut v, 1);
        return v;
    };
    v.push("pseudonym", true, format!("position {pos}"));
    let nym = out_c.pseudonyms()[pos].clone();
    let h_c = out_c.h();
    let g = params.generator();

    let test_ok = addressed_to(params, board, KIND_TEST, &nym).any(|a| {
        decrypt(params, sk, h_c, &a.ciphertext)
            .ok()
            .and_then(|p| Signed::<QuestionSheet>::from_canonical(params, &p).ok())
            .is_some_and(|s| {
                s.verify(params, &ann.ea_pk, &g)
                    && s.body.questions.len() == pairs.len()
                    && s.body.questions.iter().zip(pairs).all(|(q, p)| q == &p.question)
            })
    });
    v.push("test-sheet", test_ok, "signed questions match the answered test");

    let opened = addressed_to(params, board, KIND_NOTIFICATION, &nym)
        .find_map(|a| decrypt(params, sk, h_c, &a.ciphertext).ok());
    let Some(plain) = opened else {
        v.push("notification-decrypts", false, "no notification opens with this key");
        skip(&mut v, 3);
        return v;
    };
    let Ok(signed) = Signed::<NotificationBody>::from_canonical(params, &plain) else {
        v.push("notification-decrypts", false, "notification does not decode");
        skip(&mut v, 3);
        return v;
    };
    v.push("notification-decrypts", true, "");
    v.push("ea-signature", signed.verify(params, &ann.ea_pk, &g), "");
    let body = &signed.body;
    v.push("addressed-to-self", body.pseudonym == nym, "");

    let k = pairs.len();
    let sources_ok = view.shuffled.as_ref().is_some_and(|t| {
        body.sources.len() == k
            && t.k() == k
            && body.sources.iter().enumerate().all(|(i, &c)| c < t.n() && t.cell(i, c) == &pairs[i])
    });
    v.push("sources-match-own-pairs", sources_ok, "every row's source cell holds the own pair");

    let sheets_ok = match (&view.out_e, &view.assignment, &view.scheme) {
        (Some(out_e), Some(assignment), Some(scheme)) => {
            !body.sheets.is_empty() && body.sheets.iter().all(|s| check_sheet(params, out_e, scheme, assignment, k, s).is_ok())
        }
        _ => false,
    };
    v.push("examiner-signatures", sheets_ok, "every sheet is signed by an examiner assigned its column");

    let marks_ok = body.marks.len() == k
        && body.sources.len() == k
        && (0..k).all(|i| {
            body.sheets
                .iter()
                .any(|s| s.body.column == body.sources[i] && s.body.marks.get(i) == Some(&body.marks[i]))
        });
    v.push("marks-match-sheets", marks_ok, "");

    let receipt_ok = match (receipt, &view.alpha) {
        (Some(r), Some(alpha)) => r.verify(params, &ann.ea_pk, pairs, &nym, alpha),
        _ => false,
    };
    v.push("receipt", receipt_ok, "");
    v
}

/// Replays every check over a stored transcript. Checks that need a party's
/// secret run only when the transcript carries that secret.
pub fn verify_transcript(t: &ExamTranscript) -> TranscriptVerdict {
    let params = t.params();
    let cfg = &t.header.config;
    let mut v = Checks::default();

    let board = match t.board() {
        Ok(b) => {
            v.push("board.sequence", true, format!("{} entries", b.len()));
            b
        }
        Err(e) => {
            v.push("board.sequence", false, e);
            return v;
        }
    };

    let mut phase: Option<Phase> = None;
    let mut last_tick = None;
    let mut phases_ok = true;
    for r in &t.records {
        let tick = match r {
            Record::Phase { tick, phase: p } => {
                phases_ok &= phase.map_or(*p == Phase::PreAssignment, |q| p.index() == q.index() + 1);
                phase = Some(*p);
                Some(*tick)
            }
            Record::Board { tick, entry } => {
                phases_ok &= phase == Some(entry.phase);
                Some(*tick)
            }
            Record::Channel(m) => Some(m.tick),
            Record::Secret(_) => None,
        };
        if let Some(tick) = tick {
            phases_ok &= last_tick.is_none_or(|l| tick > l);
            last_tick = Some(tick);
        }
    }
    v.push("board.phases", phases_ok && phase == Some(Phase::Notification), "phase markers, entry phases and ticks in order");

    let view = PublicView::read(&params, &board);
    let ann_ok = view.announcement.as_ref().is_some_and(|a| {
        a.group == cfg.group.name()
            && a.hash == HASH_NAME
            && (a.n, a.m, a.k, a.d, a.mix_servers) == (cfg.n, cfg.m, cfg.k, cfg.d, cfg.mix_servers)
            && a.candidate_pks.len() == cfg.n
            && a.examiner_pks.len() == cfg.m
    });
    v.push("announcement", ann_ok, "matches the header configuration");
    let Some(ann) = view.announcement.clone() else {
        return v;
    };

    for entry in board.entries() {
        let ok = match entry.author.as_str() {
            AUTHOR_EA => entry.verify_signature(&params, &ann.ea_pk),
            AUTHOR_MIX_CANDIDATES | AUTHOR_MIX_EXAMINERS => entry.signature.is_none(),
            _ => false,
        };
        v.push(format!("board.signature#{}", entry.seq), ok, format!("{} by {}", entry.kind, entry.author));
    }

    match &view.scheme {
        Some(s) => {
            v.push("scheme.valid", s.is_valid(cfg.n) && s.d() == cfg.d, "");
            let msg = s.signing_bytes(&params);
            for (e, pk) in ann.examiner_pks.iter().enumerate() {
                let ok = s
                    .examiner_signatures
                    .get(e)
                    .is_some_and(|sig| schnorr_verify(&params, pk, &params.generator(), &msg, sig));
                v.push(format!("scheme.signature#{e}"), ok, "");
            }
        }
        None => {
            v.push("scheme.valid", false, "no partition scheme on the board");
        }
    }

    for (name, input, out, keys, size) in [
        ("registration.candidates", &view.input_c, &view.out_c, &ann.candidate_pks, cfg.n),
        ("registration.examiners", &view.input_e, &view.out_e, &ann.examiner_pks, cfg.m),
    ] {
        let ok = match (input, out) {
            (Some(input), Some(out)) => {
                &input.keys() == keys
                    && iremix_validate(&params, input).is_ok()
                    && out.columns.len() == cfg.mix_servers
                    && out.columns.iter().all(|c| c.len() == size)
            }
            _ => false,
        };
        v.push(name, ok, "registered keys, key proofs and output shape");
    }

    let reveal: Option<MixReveal> = decode_kind(&params, &board, KIND_MIX_REVEAL);
    let reveal_ok = match (&reveal, &view.out_c) {
        (Some(r), Some(out)) => {
            verify_revealed_chain(&params, &ann.candidate_pks, out, &r.exponents)
                && deanonymize(&params, &ann.candidate_pks, out, &params.scalar_product(&r.exponents)).is_ok()
        }
        _ => false,
    };
    v.push("registration.reveal", reveal_ok, "revealed candidate-side exponents reproduce the chain");

    let nyms_c: HashSet<GroupElement> = view.out_c.iter().flat_map(|o| o.pseudonyms().to_vec()).collect();
    for (name, kind) in [("testing.tests", KIND_TEST), ("notification.count", KIND_NOTIFICATION)] {
        let addressed: Vec<GroupElement> = board
            .find_all(kind)
            .filter_map(|e| e.decode_payload::<AddressedCiphertext>(&params).ok().map(|a| a.pseudonym))
            .collect();
        let distinct: HashSet<&GroupElement> = addressed.iter().collect();
        let ok = addressed.len() == cfg.n && distinct.len() == cfg.n && addressed.iter().all(|p| nyms_c.contains(p));
        v.push(name, ok, "one entry per candidate pseudonym");
    }

    v.push(
        "marking.shuffled",
        view.shuffled.as_ref().is_some_and(|t| t.k() == cfg.k && t.n() == cfg.n),
        "",
    );
    let assignment_ok = match (&view.assignment, &view.out_e) {
        (Some(a), Some(out)) => {
            let listed: HashSet<&GroupElement> = a.entries.iter().map(|(p, _)| p).collect();
            a.covers(cfg.d)
                && a.entries.iter().all(|&(_, l)| l < cfg.d)
                && a.entries.len() == cfg.m
                && listed.len() == cfg.m
                && out.pseudonyms().iter().all(|p| listed.contains(p))
        }
        _ => false,
    };
    v.push("marking.assignment", assignment_ok, "every examiner pseudonym gets one label, every label covered");
    v.push("notification.alpha", view.alpha.is_some(), "");

    let leaked = board.entries().iter().any(|e| e.payload.windows(MARK_PREFIX.len()).any(|w| w == MARK_PREFIX));
    v.push("privacy.no-plaintext-marks", !leaked, "no board payload carries a mark token in the clear");

    verify_with_secrets(t, &params, &board, &view, &ann, &mut v);
    v
}

fn verify_with_secrets(
    t: &ExamTranscript,
    params: &GroupParams,
    board: &BulletinBoard,
    view: &PublicView,
    ann: &Announcement,
    v: &mut Checks,
) {
    let g = params.generator();
    if let Some(ea) = t.secret(AUTHOR_EA) {
        v.push("secrets.ea", params.exp_g(&ea.sk) == ann.ea_pk, "");
        let mut accepted = HashSet::new();
        for m in t.channel() {
            let Ok(plain) = decrypt(params, &ea.sk, &g, &m.ciphertext) else {
                if m.to == AUTHOR_EA {
                    v.push(format!("channel.{}@{}", m.kind, m.tick), false, "does not decrypt for the authority");
                }
                continue;
            };
            match m.kind.as_str() {
                CHANNEL_SUBMISSION => {
                    let verdict = Signed::<Submission>::from_canonical(params, &plain)
                        .map_err(|e| e.to_string())
                        .and_then(|s| {
                            let out = view.out_c.as_ref().ok_or("no candidate mix output")?;
                            let pos = out.position(&s.body.pseudonym).ok_or("unregistered pseudonym")?;
                            if !s.verify(params, &s.body.pseudonym, out.h()) {
                                return Err("bad signature".into());
                            }
                            if !accepted.insert(pos) {
                                return Err("duplicate submission".into());
                            }
                            Ok(format!("pseudonym {pos}"))
                        });
                    let (ok, detail) = split(verdict);
                    v.push(format!("channel.submission@{}", m.tick), ok, detail);
                }
                CHANNEL_MARKS => {
                    let verdict = Signed::<MarkSheet>::from_canonical(params, &plain)
                        .map_err(|e| e.to_string())
                        .and_then(|s| match (&view.out_e, &view.scheme, &view.assignment) {
                            (Some(out), Some(scheme), Some(a)) => check_sheet(params, out, scheme, a, ann.k, &s)
                                .map(|_| format!("column {}", s.body.column))
                                .map_err(|e| e.to_string()),
                            _ => Err("board lacks marking data".into()),
                        });
                    let (ok, detail) = split(verdict);
                    v.push(format!("channel.marks@{}", m.tick), ok, detail);
                }
                _ => {}
            }
        }
    }

    for (e, pk) in ann.examiner_pks.iter().enumerate() {
        let Some(secret) = t.secret(&format!("examiner-{e}")) else { continue };
        let located = view.out_e.as_ref().and_then(|out| {
            let pos = find_own_pseudonym(params, &secret.sk, out).ok()?;
            view.assignment.as_ref()?.label_for(&out.pseudonyms()[pos])
        });
        v.push(
            format!("examiner#{e}"),
            params.exp_g(&secret.sk) == *pk && located.is_some(),
            "key matches and pseudonym has a label",
        );
    }

    for (i, pk) in ann.candidate_pks.iter().enumerate() {
        let Some(secret) = t.secret(&format!("candidate-{i}")) else { continue };
        let pairs = PairList::from_canonical(params, &secret.memo).map(|p| p.0).unwrap_or_default();
        let receipt = view.out_c.as_ref().and_then(|out| {
            let pos = find_own_pseudonym(params, &secret.sk, out).ok()?;
            let to = format!("pc{pos}");
            t.channel()
                .filter(|m| m.kind == CHANNEL_RECEIPT && m.to == to)
                .find_map(|m| decrypt(params, &secret.sk, out.h(), &m.ciphertext).ok())
                .and_then(|p| Receipt::from_canonical(params, &p).ok())
        });
        let verdict = candidate_verify(params, board, &secret.sk, &pairs, receipt.as_ref());
        let ok = params.exp_g(&secret.sk) == *pk && verdict.all_pass();
        v.push(format!("candidate#{i}"), ok, verdict.failed().join(","));
    }
}

fn split(r: Result<String, String>) -> (bool, String) {
    match r {
        Ok(d) => (true, d),
        Err(d) => (false, d),
    }
}
