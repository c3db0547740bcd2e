//! Payloads carried on the board and over channels.
//!
//! Every record starts with its own tag, so a signature over one kind of
//! record never verifies as a signature over another.

use rand::RngCore;

use crate::encoding::{Canonical, Decoder, Encoder};
use crate::error::{CryptoError, DecodeError};
use crate::group::{GroupElement, GroupParams, Scalar};
use crate::schnorr::{schnorr_sign, schnorr_verify, SchnorrSignature};

use super::matrix::QaPair;

pub const KIND_ANNOUNCEMENT: &str = "announcement";
pub const KIND_SCHEME: &str = "partition-scheme";
pub const KIND_MIX_INPUT_CANDIDATES: &str = "mix-input-candidates";
pub const KIND_MIX_INPUT_EXAMINERS: &str = "mix-input-examiners";
pub const KIND_MIX_OUTPUT_CANDIDATES: &str = "mix-output-candidates";
pub const KIND_MIX_OUTPUT_EXAMINERS: &str = "mix-output-examiners";
pub const KIND_TEST: &str = "test";
pub const KIND_SHUFFLED: &str = "shuffled-answers";
pub const KIND_ASSIGNMENT: &str = "assignment";
pub const KIND_NOTIFICATION: &str = "notification";
pub const KIND_MIX_REVEAL: &str = "mix-reveal";
pub const KIND_ALPHA: &str = "alpha-reveal";

const RECEIPT_DOMAIN: &[u8] = b"crex/receipt/v1";

fn tagged(dec: &mut Decoder<'_>, tag: &str) -> Result<(), DecodeError> {
    dec.expect_tag(tag)
}

/// A body plus a Schnorr signature over its canonical bytes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Signed<T> {
    pub body: T,
    pub signature: SchnorrSignature,
}

impl<T: Canonical> Signed<T> {
    pub fn sign<R: RngCore + ?Sized>(
        params: &GroupParams,
        sk: &Scalar,
        gen: &GroupElement,
        body: T,
        rng: &mut R,
    ) -> Result<Self, CryptoError> {
        let signature = schnorr_sign(params, sk, gen, &body.to_canonical(params), rng)?;
        Ok(Signed { body, signature })
    }

    pub fn verify(&self, params: &GroupParams, pk: &GroupElement, gen: &GroupElement) -> bool {
        schnorr_verify(params, pk, gen, &self.body.to_canonical(params), &self.signature)
    }
}

impl<T: Canonical> Canonical for Signed<T> {
    fn encode(&self, enc: &mut Encoder<'_>) {
        enc.record(&self.body).record(&self.signature);
    }

    fn decode(dec: &mut Decoder<'_>) -> Result<Self, DecodeError> {
        Ok(Signed { body: dec.record()?, signature: dec.record()? })
    }
}

/// Exam parameters and long-term keys, published first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Announcement {
    pub exam_id: String,
    pub group: String,
    pub hash: String,
    pub n: usize,
    pub m: usize,
    pub k: usize,
    pub d: usize,
    pub mix_servers: usize,
    pub ea_pk: GroupElement,
    pub candidate_pks: Vec<GroupElement>,
    pub examiner_pks: Vec<GroupElement>,
}

impl Canonical for Announcement {
    fn encode(&self, enc: &mut Encoder<'_>) {
        enc.str("announcement")
            .str(&self.exam_id)
            .str(&self.group)
            .str(&self.hash)
            .u64(self.n as u64)
            .u64(self.m as u64)
            .u64(self.k as u64)
            .u64(self.d as u64)
            .u64(self.mix_servers as u64)
            .element(&self.ea_pk);
        for keys in [&self.candidate_pks, &self.examiner_pks] {
            enc.list(keys, |e, x| {
                e.element(x);
            });
        }
    }

    fn decode(dec: &mut Decoder<'_>) -> Result<Self, DecodeError> {
        tagged(dec, "announcement")?;
        Ok(Announcement {
            exam_id: dec.str()?,
            group: dec.str()?,
            hash: dec.str()?,
            n: dec.usize()?,
            m: dec.usize()?,
            k: dec.usize()?,
            d: dec.usize()?,
            mix_servers: dec.usize()?,
            ea_pk: dec.element()?,
            candidate_pks: dec.list(|d| d.element())?,
            examiner_pks: dec.list(|d| d.element())?,
        })
    }
}

/// Split of the shuffled-test indices `0..n` into labeled subsets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartitionScheme {
    pub subsets: Vec<Vec<usize>>,
    pub labels: Vec<String>,
    /// One signature per examiner, in examiner order, over [`Self::signing_bytes`].
    pub examiner_signatures: Vec<SchnorrSignature>,
}

impl PartitionScheme {
    /// Contiguous, balanced split into `d` subsets labeled `P1..Pd`.
    pub fn balanced(n: usize, d: usize) -> Self {
        assert!(d >= 1 && n >= d, "need 1 <= d <= n");
        let (base, extra) = (n / d, n % d);
        let mut subsets = Vec::with_capacity(d);
        let mut next = 0;
        for r in 0..d {
            let size = base + usize::from(r < extra);
            subsets.push((next..next + size).collect());
            next += size;
        }
        PartitionScheme {
            subsets,
            labels: (1..=d).map(|r| format!("P{r}")).collect(),
            examiner_signatures: Vec::new(),
        }
    }

    pub fn d(&self) -> usize {
        self.labels.len()
    }

    /// Subsets are non-empty, disjoint, cover `0..n`, and match the labels.
    pub fn is_valid(&self, n: usize) -> bool {
        if self.subsets.len() != self.labels.len() || self.subsets.iter().any(Vec::is_empty) {
            return false;
        }
        let mut seen = vec![false; n];
        for &c in self.subsets.iter().flatten() {
            if c >= n || std::mem::replace(&mut seen[c], true) {
                return false;
            }
        }
        seen.into_iter().all(|x| x)
    }

    pub fn label_of(&self, column: usize) -> Option<usize> {
        self.subsets.iter().position(|s| s.contains(&column))
    }

    pub fn signing_bytes(&self, params: &GroupParams) -> Vec<u8> {
        let mut enc = Encoder::new(params);
        enc.str("crex/partition-scheme/v1");
        encode_scheme_body(&mut enc, self);
        enc.finish()
    }

    pub fn without_signatures(&self) -> Self {
        PartitionScheme { examiner_signatures: Vec::new(), ..self.clone() }
    }
}

fn encode_scheme_body(enc: &mut Encoder<'_>, s: &PartitionScheme) {
    enc.list(&s.subsets, |e, subset| {
        e.list(subset, |e, &c| {
            e.u64(c as u64);
        });
    });
    enc.list(&s.labels, |e, l| {
        e.str(l);
    });
}

impl Canonical for PartitionScheme {
    fn encode(&self, enc: &mut Encoder<'_>) {
        enc.str("partition-scheme");
        encode_scheme_body(enc, self);
        enc.list(&self.examiner_signatures, |e, s| {
            e.record(s);
        });
    }

    fn decode(dec: &mut Decoder<'_>) -> Result<Self, DecodeError> {
        tagged(dec, "partition-scheme")?;
        Ok(PartitionScheme {
            subsets: dec.list(|d| d.list(|d| d.usize()))?,
            labels: dec.list(|d| d.str())?,
            examiner_signatures: dec.list(|d| d.record())?,
        })
    }
}

/// Bundle of examiner signatures the authority forwards for cross-checking.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignatureBundle(pub Vec<SchnorrSignature>);

impl Canonical for SignatureBundle {
    fn encode(&self, enc: &mut Encoder<'_>) {
        enc.str("signature-bundle").list(&self.0, |e, s| {
            e.record(s);
        });
    }

    fn decode(dec: &mut Decoder<'_>) -> Result<Self, DecodeError> {
        tagged(dec, "signature-bundle")?;
        Ok(SignatureBundle(dec.list(|d| d.record())?))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuestionSheet {
    pub exam_id: String,
    pub questions: Vec<Vec<u8>>,
}

impl Canonical for QuestionSheet {
    fn encode(&self, enc: &mut Encoder<'_>) {
        enc.str("question-sheet").str(&self.exam_id).list(&self.questions, |e, q| {
            e.bytes(q);
        });
    }

    fn decode(dec: &mut Decoder<'_>) -> Result<Self, DecodeError> {
        tagged(dec, "question-sheet")?;
        Ok(QuestionSheet { exam_id: dec.str()?, questions: dec.list(|d| Ok(d.bytes()?.to_vec()))? })
    }
}

/// A ciphertext published for the holder of `pseudonym`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AddressedCiphertext {
    pub pseudonym: GroupElement,
    pub ciphertext: crate::elgamal::Ciphertext,
}

impl Canonical for AddressedCiphertext {
    fn encode(&self, enc: &mut Encoder<'_>) {
        enc.str("addressed").element(&self.pseudonym).record(&self.ciphertext);
    }

    fn decode(dec: &mut Decoder<'_>) -> Result<Self, DecodeError> {
        tagged(dec, "addressed")?;
        Ok(AddressedCiphertext { pseudonym: dec.element()?, ciphertext: dec.record()? })
    }
}

/// A candidate's answered test, signed under the candidate mix generator.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Submission {
    pub pseudonym: GroupElement,
    pub pairs: Vec<QaPair>,
}

impl Canonical for Submission {
    fn encode(&self, enc: &mut Encoder<'_>) {
        enc.str("submission").element(&self.pseudonym).list(&self.pairs, |e, p| {
            e.record(p);
        });
    }

    fn decode(dec: &mut Decoder<'_>) -> Result<Self, DecodeError> {
        tagged(dec, "submission")?;
        Ok(Submission { pseudonym: dec.element()?, pairs: dec.list(|d| d.record())? })
    }
}

pub fn receipt_digest(params: &GroupParams, pairs: &[QaPair], pseudonym: &GroupElement, alpha: &Scalar) -> Scalar {
    let mut enc = Encoder::new(params);
    enc.list(pairs, |e, p| {
        e.record(p);
    });
    params.hash_to_scalar(
        RECEIPT_DOMAIN,
        &[&enc.finish(), &params.element_to_bytes(pseudonym), &params.scalar_to_bytes(alpha)],
    )
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Receipt {
    pub digest: Scalar,
    pub signature: SchnorrSignature,
}

impl Receipt {
    pub fn signing_bytes(params: &GroupParams, digest: &Scalar) -> Vec<u8> {
        let mut enc = Encoder::new(params);
        enc.str("crex/receipt-signature/v1").scalar(digest);
        enc.finish()
    }

    /// Checks the authority's signature and that the digest commits to
    /// these pairs, this pseudonym and the revealed `alpha`.
    pub fn verify(
        &self,
        params: &GroupParams,
        ea_pk: &GroupElement,
        pairs: &[QaPair],
        pseudonym: &GroupElement,
        alpha: &Scalar,
    ) -> bool {
        schnorr_verify(params, ea_pk, &params.generator(), &Self::signing_bytes(params, &self.digest), &self.signature)
            && receipt_digest(params, pairs, pseudonym, alpha) == self.digest
    }
}

impl Canonical for Receipt {
    fn encode(&self, enc: &mut Encoder<'_>) {
        enc.str("receipt").scalar(&self.digest).record(&self.signature);
    }

    fn decode(dec: &mut Decoder<'_>) -> Result<Self, DecodeError> {
        tagged(dec, "receipt")?;
        Ok(Receipt { digest: dec.scalar()?, signature: dec.record()? })
    }
}

/// Which examiner pseudonym marks which label.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Assignment {
    pub entries: Vec<(GroupElement, usize)>,
}

impl Assignment {
    pub fn label_for(&self, pseudonym: &GroupElement) -> Option<usize> {
        self.entries.iter().find(|(p, _)| p == pseudonym).map(|&(_, l)| l)
    }

    pub fn covers(&self, d: usize) -> bool {
        (0..d).all(|l| self.entries.iter().any(|&(_, x)| x == l))
    }
}

impl Canonical for Assignment {
    fn encode(&self, enc: &mut Encoder<'_>) {
        enc.str("assignment").list(&self.entries, |e, (p, l)| {
            e.element(p).u64(*l as u64);
        });
    }

    fn decode(dec: &mut Decoder<'_>) -> Result<Self, DecodeError> {
        tagged(dec, "assignment")?;
        Ok(Assignment { entries: dec.list(|d| Ok((d.element()?, d.usize()?)))? })
    }
}

/// Marks for one shuffled column, one token per row.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MarkSheet {
    pub column: usize,
    pub label: usize,
    pub pseudonym: GroupElement,
    pub marks: Vec<Vec<u8>>,
}

impl Canonical for MarkSheet {
    fn encode(&self, enc: &mut Encoder<'_>) {
        enc.str("mark-sheet")
            .u64(self.column as u64)
            .u64(self.label as u64)
            .element(&self.pseudonym)
            .list(&self.marks, |e, m| {
                e.bytes(m);
            });
    }

    fn decode(dec: &mut Decoder<'_>) -> Result<Self, DecodeError> {
        tagged(dec, "mark-sheet")?;
        Ok(MarkSheet {
            column: dec.usize()?,
            label: dec.usize()?,
            pseudonym: dec.element()?,
            marks: dec.list(|d| Ok(d.bytes()?.to_vec()))?,
        })
    }
}

/// What a candidate receives at the end: their marks, the shuffled column
/// each row was marked in, and the signed sheets backing them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NotificationBody {
    pub pseudonym: GroupElement,
    pub marks: Vec<Vec<u8>>,
    pub sources: Vec<usize>,
    pub sheets: Vec<Signed<MarkSheet>>,
}

impl Canonical for NotificationBody {
    fn encode(&self, enc: &mut Encoder<'_>) {
        enc.str("notification")
            .element(&self.pseudonym)
            .list(&self.marks, |e, m| {
                e.bytes(m);
            })
            .list(&self.sources, |e, &c| {
                e.u64(c as u64);
            })
            .list(&self.sheets, |e, s| {
                e.record(s);
            });
    }

    fn decode(dec: &mut Decoder<'_>) -> Result<Self, DecodeError> {
        tagged(dec, "notification")?;
        Ok(NotificationBody {
            pseudonym: dec.element()?,
            marks: dec.list(|d| Ok(d.bytes()?.to_vec()))?,
            sources: dec.list(|d| d.usize())?,
            sheets: dec.list(|d| d.record())?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MixReveal {
    pub exponents: Vec<Scalar>,
}

impl Canonical for MixReveal {
    fn encode(&self, enc: &mut Encoder<'_>) {
        enc.str("mix-reveal").list(&self.exponents, |e, r| {
            e.scalar(r);
        });
    }

    fn decode(dec: &mut Decoder<'_>) -> Result<Self, DecodeError> {
        tagged(dec, "mix-reveal")?;
        Ok(MixReveal { exponents: dec.list(|d| d.scalar())? })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AlphaReveal {
    pub alpha: Scalar,
}

impl Canonical for AlphaReveal {
    fn encode(&self, enc: &mut Encoder<'_>) {
        enc.str("alpha-reveal").scalar(&self.alpha);
    }

    fn decode(dec: &mut Decoder<'_>) -> Result<Self, DecodeError> {
        tagged(dec, "alpha-reveal")?;
        Ok(AlphaReveal { alpha: dec.scalar()? })
    }
}

/// A point-to-point message. `from`/`to` name roles (`ea`, `examiner-2`) or
/// pseudonym slots (`pc3` is candidate pseudonym position 3); anonymous
/// senders use `anon`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChannelMessage {
    pub tick: u64,
    pub from: String,
    pub to: String,
    pub kind: String,
    pub ciphertext: crate::elgamal::Ciphertext,
}

pub const CHANNEL_SCHEME: &str = "scheme";
pub const CHANNEL_SCHEME_SIGNATURE: &str = "scheme-signature";
pub const CHANNEL_SIGNATURE_BUNDLE: &str = "signature-bundle";
pub const CHANNEL_SUBMISSION: &str = "submission";
pub const CHANNEL_RECEIPT: &str = "receipt";
pub const CHANNEL_MARKS: &str = "marks";
