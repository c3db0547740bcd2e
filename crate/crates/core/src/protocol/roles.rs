//! Exam authority, candidate and examiner state.
//!
//! Each role only holds what it would hold in a real deployment; the
//! simulation moves messages between them.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::{Rng, RngCore};

use crate::elgamal::{decrypt, encrypt, Ciphertext};
use crate::encoding::Canonical;
use crate::error::{CryptoError, MixnetError, ProtocolError};
use crate::group::{GroupElement, GroupParams, Scalar};
use crate::mixnet::{deanonymize, find_own_pseudonym, prove_entry, MixEntry, MixOutput};
use crate::schnorr::{keygen, schnorr_sign, schnorr_verify, KeyPair, SchnorrSignature};

use super::matrix::{AnswerMatrix, Grid, MarkMatrices, PermutationSet, QaPair};
use super::messages::{
    receipt_digest, AddressedCiphertext, Assignment, MarkSheet, NotificationBody, PartitionScheme, QuestionSheet,
    Receipt, Signed, SignatureBundle, Submission,
};
use super::RubricId;

/// Encrypts the canonical bytes of `body` for `(pk, gen)`.
fn seal<T: Canonical, R: RngCore + ?Sized>(
    params: &GroupParams,
    body: &T,
    pk: &GroupElement,
    gen: &GroupElement,
    rng: &mut R,
) -> Ciphertext {
    encrypt(params, pk, gen, &body.to_canonical(params), rng)
}

pub struct ExamAuthority {
    pub keys: KeyPair,
    pub exam_id: String,
    pub questions: Vec<Vec<u8>>,
    alpha: Scalar,
    perms: Option<PermutationSet>,
    submissions: BTreeMap<usize, Submission>,
    sheets: BTreeMap<usize, Signed<MarkSheet>>,
    /// Every rejected message, in arrival order.
    pub rejections: Vec<ProtocolError>,
}

impl ExamAuthority {
    pub fn new<R: RngCore + ?Sized>(params: &GroupParams, exam_id: &str, k: usize, rng: &mut R) -> Self {
        ExamAuthority {
            keys: keygen(params, rng),
            exam_id: exam_id.to_string(),
            questions: (1..=k).map(|i| format!("{exam_id}/q{i}").into_bytes()).collect(),
            alpha: params.random_nonzero_scalar(rng),
            perms: None,
            submissions: BTreeMap::new(),
            sheets: BTreeMap::new(),
            rejections: Vec::new(),
        }
    }

    pub fn alpha(&self) -> &Scalar {
        &self.alpha
    }

    /// The secret row permutations, once drawn.
    pub fn permutations(&self) -> Option<&PermutationSet> {
        self.perms.as_ref()
    }

    pub fn partition_scheme(&self, n: usize, d: usize) -> PartitionScheme {
        PartitionScheme::balanced(n, d)
    }

    pub fn signed_questions<R: RngCore + ?Sized>(
        &self,
        params: &GroupParams,
        rng: &mut R,
    ) -> Result<Signed<QuestionSheet>, CryptoError> {
        let sheet = QuestionSheet { exam_id: self.exam_id.clone(), questions: self.questions.clone() };
        Signed::sign(params, &self.keys.sk, &params.generator(), sheet, rng)
    }

    /// The test for one pseudonym: signed questions encrypted to the
    /// pseudonym under the candidate mix generator.
    pub fn distribute_test<R: RngCore + ?Sized>(
        &self,
        params: &GroupParams,
        pseudonym: &GroupElement,
        h_c: &GroupElement,
        rng: &mut R,
    ) -> Result<AddressedCiphertext, CryptoError> {
        let signed = self.signed_questions(params, rng)?;
        Ok(address(params, &signed, pseudonym, h_c, rng))
    }

    /// Decrypts and checks a submission. On success returns the pseudonym
    /// position and the receipt to send back.
    pub fn accept_submission<R: RngCore + ?Sized>(
        &mut self,
        params: &GroupParams,
        out_c: &MixOutput,
        ct: &Ciphertext,
        rng: &mut R,
    ) -> Result<(usize, Receipt), ProtocolError> {
        let result = self.check_submission(params, out_c, ct);
        match result {
            Ok((pos, submission)) => {
                let receipt = self.issue_receipt(params, &submission.pairs, &submission.pseudonym, rng)?;
                self.submissions.insert(pos, submission);
                Ok((pos, receipt))
            }
            Err(e) => {
                self.rejections.push(e.clone());
                Err(e)
            }
        }
    }

    fn check_submission(
        &self,
        params: &GroupParams,
        out_c: &MixOutput,
        ct: &Ciphertext,
    ) -> Result<(usize, Submission), ProtocolError> {
        let plain = decrypt(params, &self.keys.sk, &params.generator(), ct)?;
        let signed = Signed::<Submission>::from_canonical(params, &plain)?;
        let pos = out_c.position(&signed.body.pseudonym).ok_or(ProtocolError::UnregisteredPseudonym)?;
        if !signed.verify(params, &signed.body.pseudonym, out_c.h()) {
            return Err(ProtocolError::BadSignature("submission".into()));
        }
        let asked: Vec<&[u8]> = self.questions.iter().map(Vec::as_slice).collect();
        let answered: Vec<&[u8]> = signed.body.pairs.iter().map(|p| p.question.as_slice()).collect();
        if asked != answered {
            return Err(ProtocolError::WrongQuestions);
        }
        if self.submissions.contains_key(&pos) {
            return Err(ProtocolError::DuplicateSubmission);
        }
        Ok((pos, signed.body))
    }

    pub fn issue_receipt<R: RngCore + ?Sized>(
        &self,
        params: &GroupParams,
        pairs: &[QaPair],
        pseudonym: &GroupElement,
        rng: &mut R,
    ) -> Result<Receipt, CryptoError> {
        let digest = receipt_digest(params, pairs, pseudonym, &self.alpha);
        let signature =
            schnorr_sign(params, &self.keys.sk, &params.generator(), &Receipt::signing_bytes(params, &digest), rng)?;
        Ok(Receipt { digest, signature })
    }

    /// The answer matrix with column `j` = the test of pseudonym `j`.
    pub fn answer_matrix(&self, n: usize) -> Result<AnswerMatrix, ProtocolError> {
        let columns = (0..n)
            .map(|j| self.submissions.get(&j).map(|s| s.pairs.clone()).ok_or(ProtocolError::MissingSubmission(j)))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Grid::from_columns(&columns).expect("submissions carry every question"))
    }

    /// Draws the secret row permutations and returns the shuffled matrix.
    pub fn build_shuffled_matrix<R: RngCore + ?Sized>(
        &mut self,
        n: usize,
        rng: &mut R,
    ) -> Result<AnswerMatrix, ProtocolError> {
        let k = self.questions.len();
        self.build_shuffled_matrix_with(PermutationSet::random(k, n, rng), n)
    }

    /// Shuffles with caller-chosen permutations.
    pub fn build_shuffled_matrix_with(
        &mut self,
        perms: PermutationSet,
        n: usize,
    ) -> Result<AnswerMatrix, ProtocolError> {
        let t = self.answer_matrix(n)?;
        let shuffled = perms.apply(&t);
        self.perms = Some(perms);
        Ok(shuffled)
    }

    /// Random surjection from examiner pseudonyms onto the `d` labels.
    pub fn assign_partitions<R: RngCore + ?Sized>(
        &self,
        d: usize,
        examiner_pseudonyms: &[GroupElement],
        rng: &mut R,
    ) -> Result<Assignment, ProtocolError> {
        assign_surjection(d, examiner_pseudonyms, rng)
    }

    pub fn accept_marks(
        &mut self,
        params: &GroupParams,
        out_e: &MixOutput,
        scheme: &PartitionScheme,
        assignment: &Assignment,
        k: usize,
        ct: &Ciphertext,
    ) -> Result<usize, ProtocolError> {
        let result = self.check_marks(params, out_e, scheme, assignment, k, ct);
        match result {
            Ok(signed) => {
                let column = signed.body.column;
                self.sheets.insert(column, signed);
                Ok(column)
            }
            // a second examiner on the same label is redundant, not malicious
            Err(e @ ProtocolError::DuplicateMarks(_)) => Err(e),
            Err(e) => {
                self.rejections.push(e.clone());
                Err(e)
            }
        }
    }

    fn check_marks(
        &self,
        params: &GroupParams,
        out_e: &MixOutput,
        scheme: &PartitionScheme,
        assignment: &Assignment,
        k: usize,
        ct: &Ciphertext,
    ) -> Result<Signed<MarkSheet>, ProtocolError> {
        let plain = decrypt(params, &self.keys.sk, &params.generator(), ct)?;
        let signed = Signed::<MarkSheet>::from_canonical(params, &plain)?;
        check_sheet(params, out_e, scheme, assignment, k, &signed)?;
        if self.sheets.contains_key(&signed.body.column) {
            return Err(ProtocolError::DuplicateMarks(signed.body.column));
        }
        Ok(signed)
    }

    /// Unshuffles the accepted marks.
    pub fn mark_matrices(&self, n: usize) -> Result<MarkMatrices, ProtocolError> {
        let perms = self.perms.as_ref().expect("shuffle happens before notification");
        let columns = (0..n)
            .map(|c| self.sheets.get(&c).map(|s| s.body.marks.clone()).ok_or(ProtocolError::MissingMarks(c)))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(MarkMatrices::from_shuffled(Grid::from_columns(&columns).expect("sheets have k marks"), perms))
    }

    /// Per-pseudonym notification bodies, before signing and encryption.
    pub fn notification_bodies(
        &self,
        out_c: &MixOutput,
        matrices: &MarkMatrices,
    ) -> Vec<NotificationBody> {
        let perms = self.perms.as_ref().expect("shuffle happens before notification");
        let n = matrices.marks.n();
        (0..n)
            .map(|j| {
                let sources: Vec<usize> = (0..perms.k()).map(|i| perms.shuffled_position(i, j)).collect();
                let mut cols = sources.clone();
                cols.sort_unstable();
                cols.dedup();
                NotificationBody {
                    pseudonym: out_c.pseudonyms()[j].clone(),
                    marks: matrices.marks.column(j),
                    sources,
                    sheets: cols.iter().map(|c| self.sheets[c].clone()).collect(),
                }
            })
            .collect()
    }

    /// Signs a body and encrypts it to the pseudonym it names.
    pub fn seal_notification<R: RngCore + ?Sized>(
        &self,
        params: &GroupParams,
        body: NotificationBody,
        h_c: &GroupElement,
        rng: &mut R,
    ) -> Result<AddressedCiphertext, CryptoError> {
        let pseudonym = body.pseudonym.clone();
        let signed = Signed::sign(params, &self.keys.sk, &params.generator(), body, rng)?;
        Ok(address(params, &signed, &pseudonym, h_c, rng))
    }

    /// Links candidates to their marks once the candidate-side exponents are
    /// public. Entry `i` holds the marks of the candidate with key `candidate_pks[i]`.
    pub fn register_marks(
        &self,
        params: &GroupParams,
        candidate_pks: &[GroupElement],
        out_c: &MixOutput,
        exponents: &[Scalar],
        matrices: &MarkMatrices,
    ) -> Result<Vec<Vec<Vec<u8>>>, MixnetError> {
        let r_bar = params.scalar_product(exponents);
        let positions = deanonymize(params, candidate_pks, out_c, &r_bar)?;
        Ok(positions.into_iter().map(|p| matrices.marks.column(p)).collect())
    }
}

pub fn address<T: Canonical, R: RngCore + ?Sized>(
    params: &GroupParams,
    body: &T,
    pseudonym: &GroupElement,
    gen: &GroupElement,
    rng: &mut R,
) -> AddressedCiphertext {
    AddressedCiphertext { pseudonym: pseudonym.clone(), ciphertext: seal(params, body, pseudonym, gen, rng) }
}

pub fn assign_surjection<R: RngCore + ?Sized>(
    d: usize,
    examiner_pseudonyms: &[GroupElement],
    rng: &mut R,
) -> Result<Assignment, ProtocolError> {
    let m = examiner_pseudonyms.len();
    if m < d {
        return Err(ProtocolError::UncoveredPartition { examiners: m, labels: d });
    }
    let mut order: Vec<usize> = (0..m).collect();
    order.shuffle(rng);
    let mut labels = vec![0; m];
    for (slot, &e) in order.iter().enumerate() {
        labels[e] = if slot < d { slot } else { rng.gen_range(0..d) };
    }
    Ok(Assignment { entries: examiner_pseudonyms.iter().cloned().zip(labels).collect() })
}

/// Everything the authority checks on a mark sheet except duplication.
pub fn check_sheet(
    params: &GroupParams,
    out_e: &MixOutput,
    scheme: &PartitionScheme,
    assignment: &Assignment,
    k: usize,
    signed: &Signed<MarkSheet>,
) -> Result<(), ProtocolError> {
    let sheet = &signed.body;
    if out_e.position(&sheet.pseudonym).is_none() {
        return Err(ProtocolError::UnregisteredPseudonym);
    }
    if !signed.verify(params, &sheet.pseudonym, out_e.h()) {
        return Err(ProtocolError::BadSignature("mark sheet".into()));
    }
    let assigned = assignment.label_for(&sheet.pseudonym);
    let in_subset = scheme.subsets.get(sheet.label).is_some_and(|s| s.contains(&sheet.column));
    if assigned != Some(sheet.label) || !in_subset {
        return Err(ProtocolError::WrongSubset { column: sheet.column, label: sheet.label });
    }
    if sheet.marks.len() != k {
        return Err(ProtocolError::MalformedMarks(sheet.column));
    }
    Ok(())
}

pub struct Candidate {
    pub index: usize,
    pub keys: KeyPair,
    pub pseudonym_index: Option<usize>,
    pub pseudonym: Option<GroupElement>,
    pub questions: Vec<Vec<u8>>,
    pub pairs: Vec<QaPair>,
    pub receipt: Option<Receipt>,
}

impl Candidate {
    pub fn new<R: RngCore + ?Sized>(params: &GroupParams, index: usize, rng: &mut R) -> Self {
        Candidate {
            index,
            keys: keygen(params, rng),
            pseudonym_index: None,
            pseudonym: None,
            questions: Vec::new(),
            pairs: Vec::new(),
            receipt: None,
        }
    }

    pub fn registration_entry<R: RngCore + ?Sized>(
        &self,
        params: &GroupParams,
        session_id: &[u8],
        rng: &mut R,
    ) -> Result<MixEntry, CryptoError> {
        prove_entry(params, &self.keys, session_id, rng)
    }

    pub fn locate_pseudonym(&mut self, params: &GroupParams, out_c: &MixOutput) -> Result<usize, ProtocolError> {
        let pos = find_own_pseudonym(params, &self.keys.sk, out_c)
            .map_err(|_| ProtocolError::PseudonymNotFound(format!("candidate {}", self.index)))?;
        self.pseudonym_index = Some(pos);
        self.pseudonym = Some(out_c.pseudonyms()[pos].clone());
        Ok(pos)
    }

    pub fn receive_test(
        &mut self,
        params: &GroupParams,
        ea_pk: &GroupElement,
        h_c: &GroupElement,
        entry: &AddressedCiphertext,
    ) -> Result<(), ProtocolError> {
        let plain = decrypt(params, &self.keys.sk, h_c, &entry.ciphertext)?;
        let signed = Signed::<QuestionSheet>::from_canonical(params, &plain)?;
        if !signed.verify(params, ea_pk, &params.generator()) {
            return Err(ProtocolError::BadSignature("question sheet".into()));
        }
        self.questions = signed.body.questions;
        Ok(())
    }

    /// Writes an answer of random length to every question.
    pub fn answer<R: RngCore + ?Sized>(&mut self, rng: &mut R) {
        self.pairs = self
            .questions
            .iter()
            .map(|q| {
                let mut raw = vec![0u8; rng.gen_range(2..10)];
                rng.fill_bytes(&mut raw);
                let answer: String = raw.iter().map(|b| format!("{b:02x}")).collect();
                QaPair::new(q.clone(), format!("ans-{answer}"))
            })
            .collect();
    }

    /// The submission, signed under `h_c` and encrypted to the authority.
    pub fn submit_answers<R: RngCore + ?Sized>(
        &self,
        params: &GroupParams,
        ea_pk: &GroupElement,
        h_c: &GroupElement,
        rng: &mut R,
    ) -> Result<Ciphertext, CryptoError> {
        let pseudonym = self.pseudonym.clone().expect("pseudonym located before testing");
        let body = Submission { pseudonym, pairs: self.pairs.clone() };
        let signed = Signed::sign(params, &self.keys.sk, h_c, body, rng)?;
        Ok(seal(params, &signed, ea_pk, &params.generator(), rng))
    }

    pub fn receive_receipt(
        &mut self,
        params: &GroupParams,
        h_c: &GroupElement,
        ct: &Ciphertext,
    ) -> Result<(), ProtocolError> {
        let plain = decrypt(params, &self.keys.sk, h_c, ct)?;
        self.receipt = Some(Receipt::from_canonical(params, &plain)?);
        Ok(())
    }
}

pub struct Examiner {
    pub index: usize,
    pub keys: KeyPair,
    pub scheme: Option<PartitionScheme>,
    pub pseudonym: Option<GroupElement>,
    pub label: Option<usize>,
}

impl Examiner {
    pub fn new<R: RngCore + ?Sized>(params: &GroupParams, index: usize, rng: &mut R) -> Self {
        Examiner { index, keys: keygen(params, rng), scheme: None, pseudonym: None, label: None }
    }

    /// Keeps the received scheme and signs it.
    pub fn sign_scheme<R: RngCore + ?Sized>(
        &mut self,
        params: &GroupParams,
        scheme: PartitionScheme,
        rng: &mut R,
    ) -> Result<SchnorrSignature, CryptoError> {
        let sig = schnorr_sign(params, &self.keys.sk, &params.generator(), &scheme.signing_bytes(params), rng)?;
        self.scheme = Some(scheme);
        Ok(sig)
    }

    /// Checks every examiner's signature against this examiner's copy.
    /// Returns the indices whose signatures do not match.
    pub fn cross_check(
        &self,
        params: &GroupParams,
        bundle: &SignatureBundle,
        examiner_pks: &[GroupElement],
    ) -> Vec<usize> {
        let msg = self.scheme.as_ref().expect("scheme received").signing_bytes(params);
        let g = params.generator();
        (0..examiner_pks.len())
            .filter(|&j| bundle.0.get(j).is_none_or(|sig| !schnorr_verify(params, &examiner_pks[j], &g, &msg, sig)))
            .collect()
    }

    pub fn registration_entry<R: RngCore + ?Sized>(
        &self,
        params: &GroupParams,
        session_id: &[u8],
        rng: &mut R,
    ) -> Result<MixEntry, CryptoError> {
        prove_entry(params, &self.keys, session_id, rng)
    }

    pub fn locate_pseudonym(&mut self, params: &GroupParams, out_e: &MixOutput) -> Result<usize, ProtocolError> {
        let pos = find_own_pseudonym(params, &self.keys.sk, out_e)
            .map_err(|_| ProtocolError::PseudonymNotFound(format!("examiner {}", self.index)))?;
        self.pseudonym = Some(out_e.pseudonyms()[pos].clone());
        Ok(pos)
    }

    pub fn read_assignment(&mut self, assignment: &Assignment) -> Result<usize, ProtocolError> {
        let nym = self.pseudonym.as_ref().expect("pseudonym located before marking");
        let label = assignment
            .label_for(nym)
            .ok_or_else(|| ProtocolError::MissingBoardEntry(format!("assignment for examiner {}", self.index)))?;
        self.label = Some(label);
        Ok(label)
    }

    /// Unsigned sheets for every shuffled column under `label`.
    pub fn grade(&self, shuffled: &AnswerMatrix, label: usize, rubric: RubricId) -> Vec<MarkSheet> {
        let scheme = self.scheme.as_ref().expect("scheme received");
        let pseudonym = self.pseudonym.clone().expect("pseudonym located before marking");
        scheme.subsets[label]
            .iter()
            .map(|&c| MarkSheet {
                column: c,
                label,
                pseudonym: pseudonym.clone(),
                marks: shuffled.column(c).iter().map(|p| rubric.mark_pair(p)).collect(),
            })
            .collect()
    }

    pub fn sign_sheet<R: RngCore + ?Sized>(
        &self,
        params: &GroupParams,
        sheet: MarkSheet,
        gen: &GroupElement,
        rng: &mut R,
    ) -> Result<Signed<MarkSheet>, CryptoError> {
        Signed::sign(params, &self.keys.sk, gen, sheet, rng)
    }

    /// Grades the assigned subset and returns the sheets signed under
    /// `h_e`, each encrypted to the authority.
    pub fn mark<R: RngCore + ?Sized>(
        &self,
        params: &GroupParams,
        shuffled: &AnswerMatrix,
        rubric: RubricId,
        ea_pk: &GroupElement,
        h_e: &GroupElement,
        rng: &mut R,
    ) -> Result<Vec<Ciphertext>, CryptoError> {
        let label = self.label.expect("assignment read before marking");
        self.grade(shuffled, label, rubric)
            .into_iter()
            .map(|sheet| {
                let signed = self.sign_sheet(params, sheet, h_e, rng)?;
                Ok(seal(params, &signed, ea_pk, &params.generator(), rng))
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::GroupPreset;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    #[test]
    fn surjection_covers_every_label() {
        let params = GroupParams::preset(GroupPreset::Test16);
        let mut rng = ChaCha20Rng::seed_from_u64(9);
        let nyms: Vec<GroupElement> = (0..3).map(|_| keygen(&params, &mut rng).pk).collect();
        for _ in 0..100 {
            let a = assign_surjection(2, &nyms, &mut rng).unwrap();
            assert!(a.covers(2));
            let mut counts = [0; 2];
            for (_, l) in &a.entries {
                counts[*l] += 1;
            }
            counts.sort();
            assert_eq!(counts, [1, 2]);
        }
        let pair = assign_surjection(2, &nyms[..2], &mut rng).unwrap();
        assert_ne!(pair.entries[0].1, pair.entries[1].1);
        assert_eq!(
            assign_surjection(2, &nyms[..1], &mut rng),
            Err(ProtocolError::UncoveredPartition { examiners: 1, labels: 2 })
        );
    }

    #[test]
    fn other_candidate_cannot_open_a_test() {
        let params = GroupParams::preset(GroupPreset::Test16);
        let mut rng = ChaCha20Rng::seed_from_u64(10);
        let ea = ExamAuthority::new(&params, "exam", 2, &mut rng);
        let h = params.exp_g(&params.scalar_u64(77));
        let mut a = Candidate::new(&params, 0, &mut rng);
        let mut b = Candidate::new(&params, 1, &mut rng);
        let nym_a = a.keys.public_for(&params, &h);
        let entry = ea.distribute_test(&params, &nym_a, &h, &mut rng).unwrap();
        a.receive_test(&params, &ea.keys.pk, &h, &entry).unwrap();
        assert_eq!(a.questions, ea.questions);
        assert_eq!(
            b.receive_test(&params, &ea.keys.pk, &h, &entry),
            Err(ProtocolError::Crypto(CryptoError::AuthFailure))
        );
    }
}
