use std::fmt;

use rand::RngCore;

use crate::encoding::{Canonical, Decoder, Encoder};
use crate::error::{CryptoError, DecodeError};
use crate::group::{GroupElement, GroupParams};
use crate::schnorr::{schnorr_sign, schnorr_verify, KeyPair, SchnorrSignature};

pub const AUTHOR_EA: &str = "ea";
pub const AUTHOR_MIX_CANDIDATES: &str = "mix-c";
pub const AUTHOR_MIX_EXAMINERS: &str = "mix-e";

const ENTRY_TAG: &str = "crex/board-entry/v1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Phase {
    PreAssignment,
    Registration,
    Testing,
    Marking,
    Notification,
}

impl Phase {
    pub const ALL: [Phase; 5] =
        [Phase::PreAssignment, Phase::Registration, Phase::Testing, Phase::Marking, Phase::Notification];

    pub fn name(self) -> &'static str {
        match self {
            Phase::PreAssignment => "pre-assignment",
            Phase::Registration => "registration",
            Phase::Testing => "testing",
            Phase::Marking => "marking",
            Phase::Notification => "notification",
        }
    }

    pub fn from_name(name: &str) -> Option<Phase> {
        Phase::ALL.into_iter().find(|p| p.name() == name)
    }

    pub fn index(self) -> u64 {
        self as u64
    }

    pub fn from_index(i: u64) -> Option<Phase> {
        Phase::ALL.get(usize::try_from(i).ok()?).copied()
    }
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One published record. The signature is kept as raw canonical bytes so a
/// corrupted signature shows up as a failed check rather than a parse error.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoardEntry {
    pub seq: u64,
    pub phase: Phase,
    pub author: String,
    pub kind: String,
    pub payload: Vec<u8>,
    pub signature: Option<Vec<u8>>,
}

fn signing_bytes(params: &GroupParams, seq: u64, phase: Phase, author: &str, kind: &str, payload: &[u8]) -> Vec<u8> {
    let mut enc = Encoder::new(params);
    enc.str(ENTRY_TAG).u64(seq).u64(phase.index()).str(author).str(kind).bytes(payload);
    enc.finish()
}

impl BoardEntry {
    pub fn signing_bytes(&self, params: &GroupParams) -> Vec<u8> {
        signing_bytes(params, self.seq, self.phase, &self.author, &self.kind, &self.payload)
    }

    pub fn decode_signature(&self, params: &GroupParams) -> Option<SchnorrSignature> {
        SchnorrSignature::from_canonical(params, self.signature.as_deref()?).ok()
    }

    /// True iff the entry carries a well-formed signature by `pk` under `g`.
    pub fn verify_signature(&self, params: &GroupParams, pk: &GroupElement) -> bool {
        match self.decode_signature(params) {
            Some(sig) => schnorr_verify(params, pk, &params.generator(), &self.signing_bytes(params), &sig),
            None => false,
        }
    }

    pub fn decode_payload<T: Canonical>(&self, params: &GroupParams) -> Result<T, DecodeError> {
        T::from_canonical(params, &self.payload)
    }
}

impl Canonical for BoardEntry {
    fn encode(&self, enc: &mut Encoder<'_>) {
        enc.str("board-entry")
            .u64(self.seq)
            .u64(self.phase.index())
            .str(&self.author)
            .str(&self.kind)
            .bytes(&self.payload);
        match &self.signature {
            Some(sig) => enc.u64(1).bytes(sig),
            None => enc.u64(0),
        };
    }

    fn decode(dec: &mut Decoder<'_>) -> Result<Self, DecodeError> {
        dec.expect_tag("board-entry")?;
        let seq = dec.u64()?;
        let at = dec.offset();
        let phase = Phase::from_index(dec.u64()?).ok_or_else(|| DecodeError::new(at, "unknown phase"))?;
        let author = dec.str()?;
        let kind = dec.str()?;
        let payload = dec.bytes()?.to_vec();
        let at = dec.offset();
        let signature = match dec.u64()? {
            0 => None,
            1 => Some(dec.bytes()?.to_vec()),
            _ => return Err(DecodeError::new(at, "bad signature flag")),
        };
        Ok(BoardEntry { seq, phase, author, kind, payload, signature })
    }
}

/// Append-only public log. Sequence numbers are assigned on append and
/// equal the entry's position.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct BulletinBoard {
    entries: Vec<BoardEntry>,
}

impl BulletinBoard {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn entries(&self) -> &[BoardEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn current_phase(&self) -> Option<Phase> {
        self.entries.last().map(|e| e.phase)
    }

    /// Unsigned append, used by mix servers.
    pub fn post(&mut self, phase: Phase, author: &str, kind: &str, payload: Vec<u8>) -> &BoardEntry {
        let seq = self.entries.len() as u64;
        self.entries.push(BoardEntry {
            seq,
            phase,
            author: author.to_string(),
            kind: kind.to_string(),
            payload,
            signature: None,
        });
        self.entries.last().unwrap()
    }

    /// Append signed by `signer` under `g`.
    #[allow(clippy::too_many_arguments)]
    pub fn post_signed<R: RngCore + ?Sized>(
        &mut self,
        params: &GroupParams,
        signer: &KeyPair,
        phase: Phase,
        author: &str,
        kind: &str,
        payload: Vec<u8>,
        rng: &mut R,
    ) -> Result<&BoardEntry, CryptoError> {
        let seq = self.entries.len() as u64;
        let msg = signing_bytes(params, seq, phase, author, kind, &payload);
        let sig = schnorr_sign(params, &signer.sk, &params.generator(), &msg, rng)?;
        self.entries.push(BoardEntry {
            seq,
            phase,
            author: author.to_string(),
            kind: kind.to_string(),
            payload,
            signature: Some(sig.to_canonical(params)),
        });
        Ok(self.entries.last().unwrap())
    }

    /// Re-appends a stored entry, e.g. when loading a transcript. Fails
    /// unless the entry continues the sequence and does not go back a phase.
    pub fn push_entry(&mut self, entry: BoardEntry) -> Result<(), String> {
        if entry.seq != self.entries.len() as u64 {
            return Err(format!("expected sequence number {}, got {}", self.entries.len(), entry.seq));
        }
        if let Some(phase) = self.current_phase() {
            if entry.phase < phase {
                return Err(format!("entry {} goes back from {} to {}", entry.seq, phase, entry.phase));
            }
        }
        self.entries.push(entry);
        Ok(())
    }

    pub fn find(&self, kind: &str) -> Option<&BoardEntry> {
        self.entries.iter().find(|e| e.kind == kind)
    }

    pub fn find_all<'a>(&'a self, kind: &'a str) -> impl Iterator<Item = &'a BoardEntry> + 'a {
        self.entries.iter().filter(move |e| e.kind == kind)
    }

    /// The board as it looked before `phase` began.
    pub fn before(&self, phase: Phase) -> BulletinBoard {
        BulletinBoard { entries: self.entries.iter().filter(|e| e.phase < phase).cloned().collect() }
    }
}
