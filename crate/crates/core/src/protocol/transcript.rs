//! Line-delimited JSON transcript of an exam run.
//!
//! The first line is a header naming the format, hash function, group and
//! run configuration. Every following line is one record:
//!
//! ```text
//! {"type":"phase","tick":0,"phase":"pre-assignment"}
//! {"type":"board","tick":4,"seq":0,"kind":"announcement","record":"<hex>"}
//! {"type":"channel","tick":5,"from":"ea","to":"examiner-0","kind":"scheme","record":"<hex>"}
//! {"type":"secret","role":"candidate-0","sk":"<hex>","memo":"<hex>"}
//! ```
//!
//! `record` is the hex of the canonical encoding of a board entry or
//! ciphertext; `seq` and `kind` are copies for readers and must agree with
//! it. `secret` records hold key material of simulated parties so a
//! transcript can be replayed from every role's point of view; a real
//! deployment would never publish them.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::elgamal::Ciphertext;
use crate::encoding::Canonical;
use crate::error::ParseError;
use crate::group::{GroupParams, Scalar, HASH_NAME};

use super::board::{BoardEntry, BulletinBoard, Phase};
use super::messages::ChannelMessage;

pub const TRANSCRIPT_FORMAT: &str = "crex-transcript/1";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TranscriptHeader {
    pub format: String,
    pub hash: String,
    pub group: String,
    pub config: RunConfig,
}

impl TranscriptHeader {
    pub fn new(config: &RunConfig) -> Self {
        TranscriptHeader {
            format: TRANSCRIPT_FORMAT.to_string(),
            hash: HASH_NAME.to_string(),
            group: config.group.name().to_string(),
            config: config.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SecretRecord {
    pub role: String,
    pub sk: Scalar,
    pub memo: Vec<u8>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Record {
    Phase { tick: u64, phase: Phase },
    Board { tick: u64, entry: BoardEntry },
    Channel(ChannelMessage),
    Secret(SecretRecord),
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
enum Line {
    Phase { tick: u64, phase: String },
    Board { tick: u64, seq: u64, kind: String, record: String },
    Channel { tick: u64, from: String, to: String, kind: String, record: String },
    Secret { role: String, sk: String, memo: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExamTranscript {
    pub header: TranscriptHeader,
    pub records: Vec<Record>,
}

impl ExamTranscript {
    pub fn new(config: &RunConfig) -> Self {
        ExamTranscript { header: TranscriptHeader::new(config), records: Vec::new() }
    }

    pub fn params(&self) -> GroupParams {
        GroupParams::preset(self.header.config.group)
    }

    pub fn board(&self) -> Result<BulletinBoard, String> {
        let mut bb = BulletinBoard::new();
        for r in &self.records {
            if let Record::Board { entry, .. } = r {
                bb.push_entry(entry.clone())?;
            }
        }
        Ok(bb)
    }

    pub fn channel(&self) -> impl Iterator<Item = &ChannelMessage> {
        self.records.iter().filter_map(|r| match r {
            Record::Channel(m) => Some(m),
            _ => None,
        })
    }

    pub fn secrets(&self) -> impl Iterator<Item = &SecretRecord> {
        self.records.iter().filter_map(|r| match r {
            Record::Secret(s) => Some(s),
            _ => None,
        })
    }

    pub fn secret(&self, role: &str) -> Option<&SecretRecord> {
        self.secrets().find(|s| s.role == role)
    }

    pub fn phase_ticks(&self) -> Vec<(Phase, u64)> {
        self.records
            .iter()
            .filter_map(|r| match r {
                Record::Phase { tick, phase } => Some((*phase, *tick)),
                _ => None,
            })
            .collect()
    }

    pub fn to_jsonl(&self) -> String {
        let params = self.params();
        let mut out = serde_json::to_string(&self.header).expect("header serializes");
        out.push('\n');
        for r in &self.records {
            let line = match r {
                Record::Phase { tick, phase } => Line::Phase { tick: *tick, phase: phase.name().to_string() },
                Record::Board { tick, entry } => Line::Board {
                    tick: *tick,
                    seq: entry.seq,
                    kind: entry.kind.clone(),
                    record: hex::encode(entry.to_canonical(&params)),
                },
                Record::Channel(m) => Line::Channel {
                    tick: m.tick,
                    from: m.from.clone(),
                    to: m.to.clone(),
                    kind: m.kind.clone(),
                    record: hex::encode(m.ciphertext.to_canonical(&params)),
                },
                Record::Secret(s) => Line::Secret {
                    role: s.role.clone(),
                    sk: hex::encode(params.scalar_to_bytes(&s.sk)),
                    memo: hex::encode(&s.memo),
                },
            };
            out.push_str(&serde_json::to_string(&line).expect("record serializes"));
            out.push('\n');
        }
        out
    }

    pub fn from_jsonl(text: &str) -> Result<Self, ParseError> {
        let mut offset = 0;
        let mut header: Option<(TranscriptHeader, GroupParams)> = None;
        let mut records = Vec::new();
        for raw in text.split_inclusive('\n') {
            let line = raw.trim_end_matches(['\n', '\r']);
            let at = offset;
            offset += raw.len();
            if line.trim().is_empty() {
                continue;
            }
            let json_err = |e: serde_json::Error| ParseError::new(at + e.column().saturating_sub(1), e.to_string());
            match &header {
                None => {
                    let h: TranscriptHeader = serde_json::from_str(line).map_err(json_err)?;
                    if h.format != TRANSCRIPT_FORMAT {
                        return Err(ParseError::new(at, format!("unsupported format `{}`", h.format)));
                    }
                    if h.hash != HASH_NAME || h.group != h.config.group.name() {
                        return Err(ParseError::new(at, "header hash or group disagrees with the config"));
                    }
                    h.config.validate().map_err(|e| ParseError::new(at, e.to_string()))?;
                    let params = GroupParams::preset(h.config.group);
                    header = Some((h, params));
                }
                Some((_, params)) => {
                    let parsed: Line = serde_json::from_str(line).map_err(json_err)?;
                    records.push(decode_line(params, parsed).map_err(|reason| ParseError::new(at, reason))?);
                }
            }
        }
        let (header, _) = header.ok_or_else(|| ParseError::new(0, "missing transcript header"))?;
        Ok(ExamTranscript { header, records })
    }

    pub fn write(&self, path: &Path) -> std::io::Result<()> {
        std::fs::write(path, self.to_jsonl())
    }

    pub fn read(path: &Path) -> Result<Self, ParseError> {
        let text = std::fs::read_to_string(path).map_err(|e| ParseError::new(0, format!("{}: {e}", path.display())))?;
        Self::from_jsonl(&text)
    }
}

fn unhex(field: &str, s: &str) -> Result<Vec<u8>, String> {
    hex::decode(s).map_err(|e| format!("bad hex in `{field}`: {e}"))
}

fn decode_line(params: &GroupParams, line: Line) -> Result<Record, String> {
    Ok(match line {
        Line::Phase { tick, phase } => {
            Record::Phase { tick, phase: Phase::from_name(&phase).ok_or(format!("unknown phase `{phase}`"))? }
        }
        Line::Board { tick, seq, kind, record } => {
            let entry = BoardEntry::from_canonical(params, &unhex("record", &record)?)
                .map_err(|e| format!("board record: {e}"))?;
            if entry.seq != seq || entry.kind != kind {
                return Err("seq or kind disagrees with the encoded record".into());
            }
            Record::Board { tick, entry }
        }
        Line::Channel { tick, from, to, kind, record } => {
            let ciphertext = Ciphertext::from_canonical(params, &unhex("record", &record)?)
                .map_err(|e| format!("channel record: {e}"))?;
            Record::Channel(ChannelMessage { tick, from, to, kind, ciphertext })
        }
        Line::Secret { role, sk, memo } => Record::Secret(SecretRecord {
            role,
            sk: params.scalar_from_bytes(&unhex("sk", &sk)?).map_err(|e| e.to_string())?,
            memo: unhex("memo", &memo)?,
        }),
    })
}
