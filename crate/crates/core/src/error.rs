use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GroupError {
    #[error("invalid group parameters: {0}")]
    InvalidParams(String),
    #[error("unknown group preset `{0}`")]
    UnknownPreset(String),
    #[error("value is not a member of the prime-order subgroup")]
    NotMember,
    #[error("expected {expected} bytes, got {got}")]
    BadLength { expected: usize, got: usize },
    #[error("scalar is not reduced mod q")]
    ScalarOutOfRange,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CryptoError {
    #[error("the identity element cannot be used as a generator")]
    DegenerateGenerator,
    #[error("ciphertext failed authentication")]
    AuthFailure,
}

/// Failure to parse a canonical record.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("malformed record at byte {offset}: {reason}")]
pub struct DecodeError {
    pub offset: usize,
    pub reason: String,
}

impl DecodeError {
    pub fn new(offset: usize, reason: impl Into<String>) -> Self {
        DecodeError { offset, reason: reason.into() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MixnetError {
    #[error("mix batch is empty")]
    EmptyBatch,
    #[error("mix chain has no servers")]
    NoServers,
    #[error("server {server} permutes {got} positions but the batch has {expected}")]
    PermutationSize { server: usize, expected: usize, got: usize },
    #[error("server {0} has a zero exponent")]
    DegenerateExponent(usize),
    #[error("batch entry {0} is not a group member")]
    NotMember(usize),
    #[error("batch entry {0} carries no proof of knowledge")]
    MissingProof(usize),
    #[error("proof of knowledge for batch entry {0} does not verify")]
    ValidationFailure(usize),
    #[error("batch entry {0} duplicates an earlier key")]
    DuplicateKey(usize),
    #[error("no pseudonym matches the supplied key")]
    NotFound,
    #[error("revealed exponents do not map input {0} to any pseudonym")]
    InconsistentReveal(usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AttackError {
    #[error("target index {index} out of range for a list of {len}")]
    TargetOutOfRange { index: usize, len: usize },
    #[error("no output satisfies the injection relation")]
    NotFound,
    #[error("{} outputs satisfy the injection relation", .0.len())]
    Ambiguous(Vec<usize>),
    #[error("gave up after {0} attempts")]
    RetriesExhausted(usize),
    #[error(transparent)]
    Mixnet(#[from] MixnetError),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConfigError {
    #[error("invalid configuration: {0}")]
    Invalid(String),
    #[error("cannot parse configuration: {0}")]
    Parse(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProtocolError {
    #[error("examiner {examiner} signed a partition scheme that differs from ours")]
    CrossCheckFailure { examiner: usize },
    #[error("{batch} registration aborted: {source}")]
    RegistrationAborted { batch: String, source: MixnetError },
    #[error("{0} could not locate its pseudonym")]
    PseudonymNotFound(String),
    #[error("bulletin board has no `{0}` entry")]
    MissingBoardEntry(String),
    #[error("message is not addressed to a registered pseudonym")]
    UnregisteredPseudonym,
    #[error("signature check failed: {0}")]
    BadSignature(String),
    #[error("pseudonym already submitted")]
    DuplicateSubmission,
    #[error("submission does not answer the distributed questions")]
    WrongQuestions,
    #[error("no accepted submission for pseudonym {0}")]
    MissingSubmission(usize),
    #[error("{examiners} examiners cannot cover {labels} partitions")]
    UncoveredPartition { examiners: usize, labels: usize },
    #[error("column {column} is not in the subset assigned to label {label}")]
    WrongSubset { column: usize, label: usize },
    #[error("column {0} already has accepted marks")]
    DuplicateMarks(usize),
    #[error("mark sheet for column {0} has the wrong shape")]
    MalformedMarks(usize),
    #[error("no accepted marks for shuffled column {0}")]
    MissingMarks(usize),
    #[error(transparent)]
    Crypto(#[from] CryptoError),
    #[error(transparent)]
    Decode(#[from] DecodeError),
    #[error(transparent)]
    Mixnet(#[from] MixnetError),
    #[error(transparent)]
    Config(#[from] ConfigError),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CoercionError {
    #[error("secrets can only be revealed before notification (current phase: {0})")]
    PhaseError(String),
    #[error("decoy label {0} is the examiner's real assignment")]
    DecoyIsAssigned(usize),
    #[error("label {0} does not exist")]
    UnknownLabel(usize),
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
}

/// Malformed transcript or report file. `offset` is a byte offset into the file.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("parse error at byte {offset}: {reason}")]
pub struct ParseError {
    pub offset: usize,
    pub reason: String,
}

impl ParseError {
    pub fn new(offset: usize, reason: impl Into<String>) -> Self {
        ParseError { offset, reason: reason.into() }
    }
}
