//! Seeded driver for a full exam.
//!
//! Messages are delivered in a fixed schedule: examiners in index order
//! during pre-assignment (they are not anonymous yet), everything after
//! registration in pseudonym order. Every publication and every channel
//! message is recorded in the transcript with a logical tick.

use rand_chacha::ChaCha20Rng;

use crate::config::RunConfig;
use crate::elgamal::{decrypt, encrypt, Ciphertext};
use crate::encoding::Canonical;
use crate::error::{MixnetError, ProtocolError};
use crate::group::{GroupElement, GroupParams, HASH_NAME};
use crate::mixnet::{random_chain, reveal_exponents, run_iremix, MixInput, MixOutput, MixServer};
use crate::rng::RngFactory;
use crate::schnorr::keygen;

use super::board::{BulletinBoard, Phase, AUTHOR_EA, AUTHOR_MIX_CANDIDATES, AUTHOR_MIX_EXAMINERS};
use super::matrix::{AnswerMatrix, MarkMatrices, PermutationSet, QaPair};
use super::messages::*;
use super::roles::{address, Candidate, ExamAuthority, Examiner};
use super::transcript::{ExamTranscript, Record, SecretRecord};
use super::verify::{candidate_verify, CandidateVerdict};

/// Deviations injected into an otherwise honest run.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Faults {
    /// The authority sends this examiner a different partition scheme.
    pub divergent_scheme_for: Option<usize>,
    /// This candidate registers a shifted key it does not know the secret of.
    pub biased_candidate_key: Option<usize>,
    /// Same for an examiner.
    pub biased_examiner_key: Option<usize>,
    /// The test for this pseudonym position is altered after signing.
    pub tamper_test_for: Option<usize>,
    /// A party outside the candidate mix output submits a test.
    pub unregistered_submission: bool,
    /// This candidate's submission is delivered twice.
    pub replay_submission: Option<usize>,
    /// This examiner also sends marks for a column outside its subset.
    pub wrong_subset_examiner: Option<usize>,
    /// This examiner also sends a sheet signed under `g` instead of the
    /// examiner mix generator.
    pub wrong_generator_examiner: Option<usize>,
    /// A party outside the examiner mix output sends marks.
    pub unregistered_examiner: bool,
    /// This examiner never sends marks.
    pub skip_examiner: Option<usize>,
    /// The authority exchanges the marks of these two pseudonym positions.
    pub swap_notifications: Option<(usize, usize)>,
    /// The authority corrupts an examiner signature inside this pseudonym
    /// position's notification.
    pub forge_sheet_signature: Option<usize>,
    /// The authority shuffles with identity permutations.
    pub identity_shuffle: bool,
}

impl Faults {
    pub fn none() -> Self {
        Self::default()
    }
}

pub struct Simulation {
    params: GroupParams,
    config: RunConfig,
    exam_id: String,
    faults: Faults,
    rng_ea: ChaCha20Rng,
    rng_candidates: Vec<ChaCha20Rng>,
    rng_examiners: Vec<ChaCha20Rng>,
    rng_faults: ChaCha20Rng,
    factory: RngFactory,
    board: BulletinBoard,
    transcript: ExamTranscript,
    tick: u64,
    phase: Option<Phase>,
    pub ea: ExamAuthority,
    pub candidates: Vec<Candidate>,
    pub examiners: Vec<Examiner>,
    candidate_servers: Vec<MixServer>,
    scheme: Option<PartitionScheme>,
    out_c: Option<MixOutput>,
    out_e: Option<MixOutput>,
    shuffled: Option<AnswerMatrix>,
    assignment: Option<Assignment>,
    matrices: Option<MarkMatrices>,
    registered: Option<Vec<Vec<Vec<u8>>>>,
    redundant_sheets: usize,
}

/// Result of a completed run.
pub struct ExamRun {
    pub config: RunConfig,
    pub params: GroupParams,
    pub transcript: ExamTranscript,
    pub board: BulletinBoard,
    /// Marks the authority registered, by candidate index.
    pub registered_marks: Vec<Vec<Vec<u8>>>,
    /// Each candidate's own test, by candidate index.
    pub candidate_pairs: Vec<Vec<QaPair>>,
    pub candidate_verdicts: Vec<CandidateVerdict>,
    pub rejections: Vec<ProtocolError>,
    /// Valid sheets ignored because another examiner already marked the column.
    pub redundant_sheets: usize,
    /// Test-only ground truth: the authority's secret row permutations.
    pub permutations: PermutationSet,
    pub mark_matrices: MarkMatrices,
    pub candidates: Vec<Candidate>,
    pub examiners: Vec<Examiner>,
}

impl ExamRun {
    pub fn all_candidates_verified(&self) -> bool {
        self.candidate_verdicts.iter().all(CandidateVerdict::all_pass)
    }
}

impl Simulation {
    pub fn new(config: &RunConfig, faults: Faults) -> Result<Self, ProtocolError> {
        config.validate()?;
        let params = GroupParams::preset(config.group);
        let factory = RngFactory::new(config.seed);
        let exam_id = format!("exam-{}", config.seed);
        let mut rng_ea = factory.fork("ea");
        let mut rng_candidates: Vec<ChaCha20Rng> =
            (0..config.n).map(|i| factory.fork_indexed("candidate", i)).collect();
        let mut rng_examiners: Vec<ChaCha20Rng> =
            (0..config.m).map(|i| factory.fork_indexed("examiner", i)).collect();
        let ea = ExamAuthority::new(&params, &exam_id, config.k, &mut rng_ea);
        let candidates = rng_candidates.iter_mut().enumerate().map(|(i, r)| Candidate::new(&params, i, r)).collect();
        let examiners = rng_examiners.iter_mut().enumerate().map(|(i, r)| Examiner::new(&params, i, r)).collect();
        Ok(Simulation {
            transcript: ExamTranscript::new(config),
            rng_faults: factory.fork("faults"),
            params,
            config: config.clone(),
            exam_id,
            faults,
            rng_ea,
            rng_candidates,
            rng_examiners,
            factory,
            board: BulletinBoard::new(),
            tick: 0,
            phase: None,
            ea,
            candidates,
            examiners,
            candidate_servers: Vec::new(),
            scheme: None,
            out_c: None,
            out_e: None,
            shuffled: None,
            assignment: None,
            matrices: None,
            registered: None,
            redundant_sheets: 0,
        })
    }

    /// Runs all five phases.
    pub fn run(config: &RunConfig, faults: Faults) -> Result<ExamRun, ProtocolError> {
        let mut sim = Simulation::new(config, faults)?;
        sim.run_through(Phase::Notification)?;
        Ok(sim.finish())
    }

    /// Runs every phase up to and including `last`.
    pub fn run_through(&mut self, last: Phase) -> Result<(), ProtocolError> {
        for phase in Phase::ALL {
            if phase > last {
                break;
            }
            if self.phase.is_some_and(|p| p >= phase) {
                continue;
            }
            match phase {
                Phase::PreAssignment => self.pre_assignment()?,
                Phase::Registration => self.registration()?,
                Phase::Testing => self.testing()?,
                Phase::Marking => self.marking()?,
                Phase::Notification => self.notification()?,
            }
        }
        Ok(())
    }

    pub fn params(&self) -> &GroupParams {
        &self.params
    }

    pub fn config(&self) -> &RunConfig {
        &self.config
    }

    pub fn exam_id(&self) -> &str {
        &self.exam_id
    }

    pub fn board(&self) -> &BulletinBoard {
        &self.board
    }

    pub fn transcript(&self) -> &ExamTranscript {
        &self.transcript
    }

    /// The phase most recently started.
    pub fn phase(&self) -> Option<Phase> {
        self.phase
    }

    pub fn scheme(&self) -> Option<&PartitionScheme> {
        self.scheme.as_ref()
    }

    pub fn candidate_mix(&self) -> Option<&MixOutput> {
        self.out_c.as_ref()
    }

    pub fn examiner_mix(&self) -> Option<&MixOutput> {
        self.out_e.as_ref()
    }

    pub fn shuffled(&self) -> Option<&AnswerMatrix> {
        self.shuffled.as_ref()
    }

    pub fn assignment(&self) -> Option<&Assignment> {
        self.assignment.as_ref()
    }

    /// A fresh labeled stream for drivers layered on top of the run, such
    /// as coercion games.
    pub fn fork_rng(&self, label: &str) -> ChaCha20Rng {
        self.factory.fork(label)
    }

    fn begin(&mut self, phase: Phase) {
        let expected = match self.phase {
            None => Phase::PreAssignment,
            Some(p) => Phase::from_index(p.index() + 1).expect("no phase after notification"),
        };
        assert_eq!(phase, expected, "phases run in order");
        self.phase = Some(phase);
        self.transcript.records.push(Record::Phase { tick: self.tick, phase });
        self.tick += 1;
    }

    fn current(&self) -> Phase {
        self.phase.expect("a phase has started")
    }

    fn post_ea(&mut self, kind: &str, payload: Vec<u8>) -> Result<(), ProtocolError> {
        let phase = self.current();
        let entry = self
            .board
            .post_signed(&self.params, &self.ea.keys, phase, AUTHOR_EA, kind, payload, &mut self.rng_ea)?
            .clone();
        self.transcript.records.push(Record::Board { tick: self.tick, entry });
        self.tick += 1;
        Ok(())
    }

    fn post_mix(&mut self, author: &str, kind: &str, payload: Vec<u8>) {
        let phase = self.current();
        let entry = self.board.post(phase, author, kind, payload).clone();
        self.transcript.records.push(Record::Board { tick: self.tick, entry });
        self.tick += 1;
    }

    fn send(&mut self, from: &str, to: &str, kind: &str, ciphertext: Ciphertext) -> Ciphertext {
        self.transcript.records.push(Record::Channel(ChannelMessage {
            tick: self.tick,
            from: from.to_string(),
            to: to.to_string(),
            kind: kind.to_string(),
            ciphertext: ciphertext.clone(),
        }));
        self.tick += 1;
        ciphertext
    }

    fn h_c(&self) -> GroupElement {
        self.out_c.as_ref().expect("registration done").h().clone()
    }

    fn h_e(&self) -> GroupElement {
        self.out_e.as_ref().expect("registration done").h().clone()
    }

    /// Announcement, scheme distribution and the examiners' cross-check.
    pub fn pre_assignment(&mut self) -> Result<(), ProtocolError> {
        self.begin(Phase::PreAssignment);
        let params = self.params.clone();
        let g = params.generator();
        let announcement = Announcement {
            exam_id: self.exam_id.clone(),
            group: self.config.group.name().to_string(),
            hash: HASH_NAME.to_string(),
            n: self.config.n,
            m: self.config.m,
            k: self.config.k,
            d: self.config.d,
            mix_servers: self.config.mix_servers,
            ea_pk: self.ea.keys.pk.clone(),
            candidate_pks: self.candidates.iter().map(|c| c.keys.pk.clone()).collect(),
            examiner_pks: self.examiners.iter().map(|e| e.keys.pk.clone()).collect(),
        };
        self.post_ea(KIND_ANNOUNCEMENT, announcement.to_canonical(&params))?;

        let scheme = self.ea.partition_scheme(self.config.n, self.config.d);
        let mut signatures = Vec::with_capacity(self.config.m);
        for e in 0..self.config.m {
            let mut copy = scheme.clone();
            if self.faults.divergent_scheme_for == Some(e) {
                copy.labels[0].push('*');
            }
            let role = format!("examiner-{e}");
            let pk = self.examiners[e].keys.pk.clone();
            let ct = encrypt(&params, &pk, &g, &copy.to_canonical(&params), &mut self.rng_ea);
            let ct = self.send(AUTHOR_EA, &role, CHANNEL_SCHEME, ct);
            let received = PartitionScheme::from_canonical(&params, &decrypt(&params, &self.examiners[e].keys.sk, &g, &ct)?)?;
            let sig = self.examiners[e].sign_scheme(&params, received, &mut self.rng_examiners[e])?;
            let ct = encrypt(&params, &self.ea.keys.pk, &g, &sig.to_canonical(&params), &mut self.rng_examiners[e]);
            let ct = self.send(&role, AUTHOR_EA, CHANNEL_SCHEME_SIGNATURE, ct);
            signatures.push(crate::schnorr::SchnorrSignature::from_canonical(
                &params,
                &decrypt(&params, &self.ea.keys.sk, &g, &ct)?,
            )?);
        }

        let bundle = SignatureBundle(signatures.clone());
        let examiner_pks: Vec<GroupElement> = self.examiners.iter().map(|e| e.keys.pk.clone()).collect();
        let mut blame = vec![0usize; self.config.m];
        for e in 0..self.config.m {
            let pk = self.examiners[e].keys.pk.clone();
            let ct = encrypt(&params, &pk, &g, &bundle.to_canonical(&params), &mut self.rng_ea);
            let ct = self.send(AUTHOR_EA, &format!("examiner-{e}"), CHANNEL_SIGNATURE_BUNDLE, ct);
            let received = SignatureBundle::from_canonical(&params, &decrypt(&params, &self.examiners[e].keys.sk, &g, &ct)?)?;
            for j in self.examiners[e].cross_check(&params, &received, &examiner_pks) {
                blame[j] += 1;
            }
        }
        // the diverging examiner is the one most others disagree with
        if let Some((examiner, _)) = blame.iter().enumerate().filter(|(_, &b)| b > 0).max_by_key(|&(j, &b)| (b, std::cmp::Reverse(j))) {
            return Err(ProtocolError::CrossCheckFailure { examiner });
        }

        let published = PartitionScheme { examiner_signatures: signatures, ..scheme };
        self.post_ea(KIND_SCHEME, published.to_canonical(&params))?;
        self.scheme = Some(published);
        Ok(())
    }

    /// Two IRemix sessions, one per role. A failed candidate batch does not
    /// stop the examiner batch.
    pub fn registration(&mut self) -> Result<(), ProtocolError> {
        self.begin(Phase::Registration);
        let params = self.params.clone();
        let mut failure = None;

        let session_c = format!("{}/candidates", self.exam_id);
        let mut entries = Vec::with_capacity(self.config.n);
        for (c, rng) in self.candidates.iter().zip(self.rng_candidates.iter_mut()) {
            entries.push(c.registration_entry(&params, session_c.as_bytes(), rng)?);
        }
        if let Some(i) = self.faults.biased_candidate_key {
            let shift = params.exp_g(&params.random_nonzero_scalar(&mut self.rng_faults));
            entries[i].pk = params.mul(&entries[i].pk, &shift);
        }
        let input_c = MixInput { session_id: session_c.into_bytes(), entries };
        self.post_mix(AUTHOR_MIX_CANDIDATES, KIND_MIX_INPUT_CANDIDATES, input_c.to_canonical(&params));
        let mut rng_mix = self.factory.fork("mix-c");
        self.candidate_servers = random_chain(&params, self.config.mix_servers, self.config.n, &mut rng_mix);
        match run_iremix(&params, &self.candidate_servers, &input_c) {
            Ok(out) => {
                self.post_mix(AUTHOR_MIX_CANDIDATES, KIND_MIX_OUTPUT_CANDIDATES, out.to_canonical(&params));
                self.out_c = Some(out);
            }
            Err(source) => failure = Some(("candidates", source)),
        }

        let session_e = format!("{}/examiners", self.exam_id);
        let mut entries = Vec::with_capacity(self.config.m);
        for (e, rng) in self.examiners.iter().zip(self.rng_examiners.iter_mut()) {
            entries.push(e.registration_entry(&params, session_e.as_bytes(), rng)?);
        }
        if let Some(i) = self.faults.biased_examiner_key {
            let shift = params.exp_g(&params.random_nonzero_scalar(&mut self.rng_faults));
            entries[i].pk = params.mul(&entries[i].pk, &shift);
        }
        let input_e = MixInput { session_id: session_e.into_bytes(), entries };
        self.post_mix(AUTHOR_MIX_EXAMINERS, KIND_MIX_INPUT_EXAMINERS, input_e.to_canonical(&params));
        let mut rng_mix = self.factory.fork("mix-e");
        let servers_e = random_chain(&params, self.config.mix_servers, self.config.m, &mut rng_mix);
        match run_iremix(&params, &servers_e, &input_e) {
            Ok(out) => {
                self.post_mix(AUTHOR_MIX_EXAMINERS, KIND_MIX_OUTPUT_EXAMINERS, out.to_canonical(&params));
                self.out_e = Some(out);
            }
            Err(source) => {
                failure.get_or_insert(("examiners", source));
            }
        }

        if let Some((batch, source)) = failure {
            return Err(ProtocolError::RegistrationAborted { batch: batch.to_string(), source });
        }
        let out_c = self.out_c.clone().expect("candidate batch ran");
        let out_e = self.out_e.clone().expect("examiner batch ran");
        for c in &mut self.candidates {
            c.locate_pseudonym(&params, &out_c)?;
        }
        for e in &mut self.examiners {
            e.locate_pseudonym(&params, &out_e)?;
        }
        Ok(())
    }

    fn candidates_by_pseudonym(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.candidates.len()).collect();
        order.sort_by_key(|&i| self.candidates[i].pseudonym_index);
        order
    }

    fn examiners_by_pseudonym(&self) -> Vec<usize> {
        let out_e = self.out_e.as_ref().expect("registration done");
        let mut order: Vec<usize> = (0..self.examiners.len()).collect();
        order.sort_by_key(|&i| out_e.position(self.examiners[i].pseudonym.as_ref().unwrap()));
        order
    }

    /// Test distribution, answer submission and receipts.
    pub fn testing(&mut self) -> Result<(), ProtocolError> {
        self.begin(Phase::Testing);
        let params = self.params.clone();
        let out_c = self.out_c.clone().expect("registration done");
        let h_c = self.h_c();
        let ea_pk = self.ea.keys.pk.clone();

        let mut tests = Vec::with_capacity(self.config.n);
        for (j, nym) in out_c.pseudonyms().iter().enumerate() {
            let entry = if self.faults.tamper_test_for == Some(j) {
                let mut signed = self.ea.signed_questions(&params, &mut self.rng_ea)?;
                signed.body.questions[0].push(b'!');
                address(&params, &signed, nym, &h_c, &mut self.rng_ea)
            } else {
                self.ea.distribute_test(&params, nym, &h_c, &mut self.rng_ea)?
            };
            self.post_ea(KIND_TEST, entry.to_canonical(&params))?;
            tests.push(entry);
        }

        for i in self.candidates_by_pseudonym() {
            let pos = self.candidates[i].pseudonym_index.expect("located");
            self.candidates[i].receive_test(&params, &ea_pk, &h_c, &tests[pos])?;
            self.candidates[i].answer(&mut self.rng_candidates[i]);
            let ct = self.candidates[i].submit_answers(&params, &ea_pk, &h_c, &mut self.rng_candidates[i])?;
            let ct = self.send("anon", AUTHOR_EA, CHANNEL_SUBMISSION, ct);
            self.deliver_submission(&out_c, &ct)?;
            if self.faults.replay_submission == Some(i) {
                let ct = self.send("anon", AUTHOR_EA, CHANNEL_SUBMISSION, ct);
                self.deliver_submission(&out_c, &ct)?;
            }
        }

        if self.faults.unregistered_submission {
            let mut outsider = Candidate::new(&params, usize::MAX, &mut self.rng_faults);
            outsider.pseudonym = Some(outsider.keys.public_for(&params, &h_c));
            outsider.questions = self.ea.questions.clone();
            outsider.answer(&mut self.rng_faults);
            let ct = outsider.submit_answers(&params, &ea_pk, &h_c, &mut self.rng_faults)?;
            let ct = self.send("anon", AUTHOR_EA, CHANNEL_SUBMISSION, ct);
            self.deliver_submission(&out_c, &ct)?;
        }
        Ok(())
    }

    fn deliver_submission(&mut self, out_c: &MixOutput, ct: &Ciphertext) -> Result<(), ProtocolError> {
        let params = self.params.clone();
        let Ok((pos, receipt)) = self.ea.accept_submission(&params, out_c, ct, &mut self.rng_ea) else {
            return Ok(());
        };
        let h_c = out_c.h().clone();
        let nym = out_c.pseudonyms()[pos].clone();
        let sealed = encrypt(&params, &nym, &h_c, &receipt.to_canonical(&params), &mut self.rng_ea);
        let sealed = self.send(AUTHOR_EA, &format!("pc{pos}"), CHANNEL_RECEIPT, sealed);
        if let Some(c) = self.candidates.iter_mut().find(|c| c.pseudonym_index == Some(pos)) {
            c.receive_receipt(&params, &h_c, &sealed)?;
        }
        Ok(())
    }

    /// Shuffle, assignment and marking.
    pub fn marking(&mut self) -> Result<(), ProtocolError> {
        self.begin(Phase::Marking);
        let params = self.params.clone();
        let n = self.config.n;
        let shuffled = if self.faults.identity_shuffle {
            self.ea.build_shuffled_matrix_with(PermutationSet::identity(self.config.k, n), n)?
        } else {
            self.ea.build_shuffled_matrix(n, &mut self.rng_ea)?
        };
        self.post_ea(KIND_SHUFFLED, shuffled.to_canonical(&params))?;
        let out_e = self.out_e.clone().expect("registration done");
        let assignment = self.ea.assign_partitions(self.config.d, out_e.pseudonyms(), &mut self.rng_ea)?;
        self.post_ea(KIND_ASSIGNMENT, assignment.to_canonical(&params))?;
        self.shuffled = Some(shuffled.clone());
        self.assignment = Some(assignment.clone());
        let scheme = self.scheme.clone().expect("pre-assignment done");
        let ea_pk = self.ea.keys.pk.clone();
        let h_e = self.h_e();
        let g = params.generator();

        for e in self.examiners_by_pseudonym() {
            let label = self.examiners[e].read_assignment(&assignment)?;
            if self.faults.skip_examiner == Some(e) {
                continue;
            }
            let mut extra = Vec::new();
            if self.faults.wrong_generator_examiner == Some(e) {
                let sheet = self.examiners[e].grade(&shuffled, label, self.config.rubric).remove(0);
                extra.push(self.examiners[e].sign_sheet(&params, sheet, &g, &mut self.rng_examiners[e])?);
            }
            if self.faults.wrong_subset_examiner == Some(e) {
                if let Some(&column) = (0..n).find(|c| !scheme.subsets[label].contains(c)).as_ref() {
                    let mut sheet = self.examiners[e].grade(&shuffled, label, self.config.rubric).remove(0);
                    sheet.column = column;
                    extra.push(self.examiners[e].sign_sheet(&params, sheet, &h_e, &mut self.rng_examiners[e])?);
                }
            }
            let mut cts: Vec<Ciphertext> = extra
                .iter()
                .map(|s| encrypt(&params, &ea_pk, &g, &s.to_canonical(&params), &mut self.rng_examiners[e]))
                .collect();
            cts.extend(self.examiners[e].mark(
                &params,
                &shuffled,
                self.config.rubric,
                &ea_pk,
                &h_e,
                &mut self.rng_examiners[e],
            )?);
            for ct in cts {
                let ct = self.send("anon", AUTHOR_EA, CHANNEL_MARKS, ct);
                self.deliver_marks(&out_e, &scheme, &assignment, &ct);
            }
        }

        if self.faults.unregistered_examiner {
            let outsider = keygen(&params, &mut self.rng_faults);
            let sheet = MarkSheet {
                column: scheme.subsets[0][0],
                label: 0,
                pseudonym: outsider.public_for(&params, &h_e),
                marks: shuffled.column(scheme.subsets[0][0]).iter().map(|p| self.config.rubric.mark_pair(p)).collect(),
            };
            let signed = Signed::sign(&params, &outsider.sk, &h_e, sheet, &mut self.rng_faults)?;
            let ct = encrypt(&params, &ea_pk, &g, &signed.to_canonical(&params), &mut self.rng_faults);
            let ct = self.send("anon", AUTHOR_EA, CHANNEL_MARKS, ct);
            self.deliver_marks(&out_e, &scheme, &assignment, &ct);
        }
        Ok(())
    }

    fn deliver_marks(&mut self, out_e: &MixOutput, scheme: &PartitionScheme, assignment: &Assignment, ct: &Ciphertext) {
        let params = self.params.clone();
        if let Err(ProtocolError::DuplicateMarks(_)) =
            self.ea.accept_marks(&params, out_e, scheme, assignment, self.config.k, ct)
        {
            self.redundant_sheets += 1;
        }
    }

    /// Notifications, candidate-side exponent reveal, registration of
    /// marks and the receipt nonce reveal.
    pub fn notification(&mut self) -> Result<(), ProtocolError> {
        self.begin(Phase::Notification);
        let params = self.params.clone();
        let out_c = self.out_c.clone().expect("registration done");
        let h_c = self.h_c();
        let matrices = self.ea.mark_matrices(self.config.n)?;
        let mut bodies = self.ea.notification_bodies(&out_c, &matrices);
        if let Some((a, b)) = self.faults.swap_notifications {
            bodies.swap(a, b);
            let (pa, pb) = (bodies[a].pseudonym.clone(), bodies[b].pseudonym.clone());
            bodies[a].pseudonym = pb;
            bodies[b].pseudonym = pa;
        }
        if let Some(j) = self.faults.forge_sheet_signature {
            let sig = &mut bodies[j].sheets[0].signature;
            sig.response = params.scalar_add(&sig.response, &params.scalar_u64(1));
        }
        for body in bodies {
            let entry = self.ea.seal_notification(&params, body, &h_c, &mut self.rng_ea)?;
            self.post_ea(KIND_NOTIFICATION, entry.to_canonical(&params))?;
        }

        let exponents = reveal_exponents(&self.candidate_servers);
        self.post_mix(AUTHOR_MIX_CANDIDATES, KIND_MIX_REVEAL, MixReveal { exponents: exponents.clone() }.to_canonical(&params));
        let pks: Vec<GroupElement> = self.candidates.iter().map(|c| c.keys.pk.clone()).collect();
        let registered = self
            .ea
            .register_marks(&params, &pks, &out_c, &exponents, &matrices)
            .map_err(ProtocolError::Mixnet)?;
        self.post_ea(KIND_ALPHA, AlphaReveal { alpha: self.ea.alpha().clone() }.to_canonical(&params))?;

        self.registered = Some(registered);
        self.matrices = Some(matrices);
        self.record_secrets();
        Ok(())
    }

    fn record_secrets(&mut self) {
        let params = &self.params;
        let mut secrets = vec![SecretRecord { role: AUTHOR_EA.into(), sk: self.ea.keys.sk.clone(), memo: Vec::new() }];
        for c in &self.candidates {
            secrets.push(SecretRecord {
                role: format!("candidate-{}", c.index),
                sk: c.keys.sk.clone(),
                memo: PairList(c.pairs.clone()).to_canonical(params),
            });
        }
        for e in &self.examiners {
            secrets.push(SecretRecord { role: format!("examiner-{}", e.index), sk: e.keys.sk.clone(), memo: Vec::new() });
        }
        self.transcript.records.extend(secrets.into_iter().map(Record::Secret));
    }

    /// Finalizes a run that completed notification.
    pub fn finish(self) -> ExamRun {
        assert_eq!(self.phase, Some(Phase::Notification), "run has not reached notification");
        let candidate_verdicts = self
            .candidates
            .iter()
            .map(|c| candidate_verify(&self.params, &self.board, &c.keys.sk, &c.pairs, c.receipt.as_ref()))
            .collect();
        ExamRun {
            config: self.config,
            transcript: self.transcript,
            board: self.board,
            registered_marks: self.registered.expect("notification done"),
            candidate_pairs: self.candidates.iter().map(|c| c.pairs.clone()).collect(),
            candidate_verdicts,
            rejections: self.ea.rejections.clone(),
            redundant_sheets: self.redundant_sheets,
            permutations: self.ea.permutations().expect("shuffled").clone(),
            mark_matrices: self.matrices.expect("notification done"),
            candidates: self.candidates,
            examiners: self.examiners,
            params: self.params,
        }
    }
}

/// A candidate's own test, as kept in transcript secret records.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairList(pub Vec<QaPair>);

impl Canonical for PairList {
    fn encode(&self, enc: &mut crate::encoding::Encoder<'_>) {
        enc.str("pair-list").list(&self.0, |e, p| {
            e.record(p);
        });
    }

    fn decode(dec: &mut crate::encoding::Decoder<'_>) -> Result<Self, crate::error::DecodeError> {
        dec.expect_tag("pair-list")?;
        Ok(PairList(dec.list(|d| d.record())?))
    }
}

/// Convenience for callers matching on registration failures.
pub fn aborted_batch(err: &ProtocolError) -> Option<(&str, &MixnetError)> {
    match err {
        ProtocolError::RegistrationAborted { batch, source } => Some((batch.as_str(), source)),
        _ => None,
    }
}
