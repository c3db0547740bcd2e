//! Exponentiation mixnet producing pseudonyms from public keys.
//!
//! Server `k` raises every element of its input column to a secret exponent
//! `r_k`, shuffles the column with a secret permutation, and raises the
//! running generator to `r_k` as well. After `m` servers the final generator
//! is `h = g^(r_1 ... r_m)` and the output column holds `pk_i^(r_1 ... r_m)
//! = h^(sk_i)` in shuffled order, so only the owner of `sk_i` can recognise
//! their pseudonym.
//!
//! The injection-resistant variant requires every input key to carry a
//! proof of knowledge of its discrete log. One bad or missing proof rejects
//! the whole batch before any server runs.

use std::collections::{HashMap, HashSet};

use rand::RngCore;

use crate::encoding::{Canonical, Decoder, Encoder};
use crate::error::{CryptoError, DecodeError, MixnetError};
use crate::group::{GroupElement, GroupParams, Scalar};
use crate::permutation::Permutation;
use crate::schnorr::{dlog_prove, dlog_verify, DlogProof, KeyPair};

const PROOF_DOMAIN: &str = "crex/iremix/v1";

/// One mix server's secrets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MixServer {
    pub index: usize,
    exponent: Scalar,
    permutation: Permutation,
}

impl MixServer {
    pub fn new(index: usize, exponent: Scalar, permutation: Permutation) -> Result<Self, MixnetError> {
        if exponent.is_zero() {
            return Err(MixnetError::DegenerateExponent(index));
        }
        Ok(MixServer { index, exponent, permutation })
    }

    pub fn random<R: RngCore + ?Sized>(
        params: &GroupParams,
        index: usize,
        batch_size: usize,
        rng: &mut R,
    ) -> Self {
        MixServer {
            index,
            exponent: params.random_nonzero_scalar(rng),
            permutation: Permutation::random(batch_size, rng),
        }
    }

    pub fn exponent(&self) -> &Scalar {
        &self.exponent
    }

    pub fn permutation(&self) -> &Permutation {
        &self.permutation
    }

    pub fn batch_size(&self) -> usize {
        self.permutation.len()
    }
}

/// A `count`-server chain with fresh secrets for a batch of `batch_size`.
pub fn random_chain<R: RngCore + ?Sized>(
    params: &GroupParams,
    count: usize,
    batch_size: usize,
    rng: &mut R,
) -> Vec<MixServer> {
    (0..count).map(|k| MixServer::random(params, k, batch_size, rng)).collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MixEntry {
    pub pk: GroupElement,
    pub proof: Option<DlogProof>,
}

/// The list `L` of public keys submitted to a mix session.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MixInput {
    pub session_id: Vec<u8>,
    pub entries: Vec<MixEntry>,
}

impl MixInput {
    /// Plain batch without proofs.
    pub fn plain(session_id: &[u8], keys: &[GroupElement]) -> Self {
        MixInput {
            session_id: session_id.to_vec(),
            entries: keys.iter().map(|pk| MixEntry { pk: pk.clone(), proof: None }).collect(),
        }
    }

    pub fn keys(&self) -> Vec<GroupElement> {
        self.entries.iter().map(|e| e.pk.clone()).collect()
    }
}

/// Context string a key-ownership proof is bound to. The session id is
/// expected to carry the role label (candidates vs examiners) so a proof
/// cannot be replayed into the other batch.
pub fn proof_context(session_id: &[u8]) -> Vec<u8> {
    let mut ctx = PROOF_DOMAIN.as_bytes().to_vec();
    ctx.push(0);
    ctx.extend_from_slice(session_id);
    ctx
}

/// Builds the entry a party submits for registration: its key plus a
/// proof of knowledge of the secret key.
pub fn prove_entry<R: RngCore + ?Sized>(
    params: &GroupParams,
    key: &KeyPair,
    session_id: &[u8],
    rng: &mut R,
) -> Result<MixEntry, CryptoError> {
    let proof = dlog_prove(params, &key.sk, &params.generator(), &proof_context(session_id), rng)?;
    Ok(MixEntry { pk: key.pk.clone(), proof: Some(proof) })
}

/// Keys that passed the injection-resistance gate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidatedBatch(Vec<GroupElement>);

impl ValidatedBatch {
    pub fn keys(&self) -> &[GroupElement] {
        &self.0
    }
}

/// Accepts the batch only if every entry carries a proof that verifies
/// under `g` and the session context, and no key repeats.
pub fn iremix_validate(params: &GroupParams, input: &MixInput) -> Result<ValidatedBatch, MixnetError> {
    if input.entries.is_empty() {
        return Err(MixnetError::EmptyBatch);
    }
    let ctx = proof_context(&input.session_id);
    let g = params.generator();
    let mut seen = HashSet::new();
    for (i, entry) in input.entries.iter().enumerate() {
        if !params.is_member(entry.pk.value()) {
            return Err(MixnetError::NotMember(i));
        }
        let proof = entry.proof.as_ref().ok_or(MixnetError::MissingProof(i))?;
        if !dlog_verify(params, &entry.pk, &g, &ctx, proof) {
            return Err(MixnetError::ValidationFailure(i));
        }
        if !seen.insert(entry.pk.clone()) {
            return Err(MixnetError::DuplicateKey(i));
        }
    }
    Ok(ValidatedBatch(input.keys()))
}

/// Everything a chain run publishes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MixOutput {
    /// Output column of every server, in chain order. The last column is the
    /// pseudonym list.
    pub columns: Vec<Vec<GroupElement>>,
    /// `g^(r_1)`, `g^(r_1 r_2)`, ... The last one is `h`.
    pub per_server_generators: Vec<GroupElement>,
}

impl MixOutput {
    pub fn pseudonyms(&self) -> &[GroupElement] {
        self.columns.last().map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn h(&self) -> &GroupElement {
        self.per_server_generators.last().expect("chain has at least one server")
    }

    pub fn position(&self, pseudonym: &GroupElement) -> Option<usize> {
        self.pseudonyms().iter().position(|x| x == pseudonym)
    }
}

impl Canonical for MixOutput {
    fn encode(&self, enc: &mut Encoder<'_>) {
        enc.list(&self.columns, |e, col| {
            e.list(col, |e, x| {
                e.element(x);
            });
        });
        enc.list(&self.per_server_generators, |e, x| {
            e.element(x);
        });
    }

    fn decode(dec: &mut Decoder<'_>) -> Result<Self, DecodeError> {
        let start = dec.offset();
        let columns = dec.list(|d| d.list(|d| d.element()))?;
        let per_server_generators = dec.list(|d| d.element())?;
        if columns.is_empty() || columns.len() != per_server_generators.len() {
            return Err(DecodeError::new(start, "column and generator counts differ"));
        }
        Ok(MixOutput { columns, per_server_generators })
    }
}

impl Canonical for MixInput {
    fn encode(&self, enc: &mut Encoder<'_>) {
        enc.bytes(&self.session_id);
        enc.list(&self.entries, |e, entry| {
            e.element(&entry.pk);
            match &entry.proof {
                Some(proof) => {
                    e.u64(1).record(proof);
                }
                None => {
                    e.u64(0);
                }
            }
        });
    }

    fn decode(dec: &mut Decoder<'_>) -> Result<Self, DecodeError> {
        let session_id = dec.bytes()?.to_vec();
        let entries = dec.list(|d| {
            let pk = d.element()?;
            let start = d.offset();
            let proof = match d.u64()? {
                0 => None,
                1 => Some(d.record()?),
                _ => return Err(DecodeError::new(start, "bad proof flag")),
            };
            Ok(MixEntry { pk, proof })
        })?;
        Ok(MixInput { session_id, entries })
    }
}

/// One server's pass: raise every element and the generator to `r_k`, then
/// move item `i` to position `π_k(i)`.
pub fn mix_step(
    params: &GroupParams,
    server: &MixServer,
    batch: &[GroupElement],
    gen_in: &GroupElement,
) -> Result<(Vec<GroupElement>, GroupElement), MixnetError> {
    if batch.is_empty() {
        return Err(MixnetError::EmptyBatch);
    }
    if server.batch_size() != batch.len() {
        return Err(MixnetError::PermutationSize {
            server: server.index,
            expected: batch.len(),
            got: server.batch_size(),
        });
    }
    if let Some(i) = batch.iter().position(|x| !params.is_member(x.value())) {
        return Err(MixnetError::NotMember(i));
    }
    let raised: Vec<GroupElement> = batch.iter().map(|x| params.exp(x, &server.exponent)).collect();
    Ok((server.permutation.scatter(&raised), params.exp(gen_in, &server.exponent)))
}

fn chain(
    params: &GroupParams,
    servers: &[MixServer],
    batch: &[GroupElement],
) -> Result<MixOutput, MixnetError> {
    if servers.is_empty() {
        return Err(MixnetError::NoServers);
    }
    let mut columns = Vec::with_capacity(servers.len());
    let mut per_server_generators = Vec::with_capacity(servers.len());
    let mut column = batch.to_vec();
    let mut gen = params.generator();
    for server in servers {
        let (next, next_gen) = mix_step(params, server, &column, &gen)?;
        columns.push(next.clone());
        per_server_generators.push(next_gen.clone());
        column = next;
        gen = next_gen;
    }
    Ok(MixOutput { columns, per_server_generators })
}

/// Plain chain: any proofs in the input are ignored.
pub fn run_chain(
    params: &GroupParams,
    servers: &[MixServer],
    input: &MixInput,
) -> Result<MixOutput, MixnetError> {
    chain(params, servers, &input.keys())
}

/// Chain over a batch that passed [`iremix_validate`].
pub fn run_validated(
    params: &GroupParams,
    servers: &[MixServer],
    batch: &ValidatedBatch,
) -> Result<MixOutput, MixnetError> {
    chain(params, servers, batch.keys())
}

/// Validate, then run. No output exists unless validation passes.
pub fn run_iremix(
    params: &GroupParams,
    servers: &[MixServer],
    input: &MixInput,
) -> Result<MixOutput, MixnetError> {
    let batch = iremix_validate(params, input)?;
    run_validated(params, servers, &batch)
}

pub fn find_own_pseudonym(params: &GroupParams, sk: &Scalar, out: &MixOutput) -> Result<usize, MixnetError> {
    let mine = params.exp(out.h(), sk);
    out.position(&mine).ok_or(MixnetError::NotFound)
}

pub fn reveal_exponents(servers: &[MixServer]) -> Vec<Scalar> {
    servers.iter().map(|s| s.exponent.clone()).collect()
}

/// Maps input index `i` to the position of `pks[i]^r_bar` in the output.
pub fn deanonymize(
    params: &GroupParams,
    pks: &[GroupElement],
    out: &MixOutput,
    r_bar: &Scalar,
) -> Result<Vec<usize>, MixnetError> {
    let index: HashMap<&GroupElement, usize> =
        out.pseudonyms().iter().enumerate().map(|(j, x)| (x, j)).collect();
    pks.iter()
        .enumerate()
        .map(|(i, pk)| {
            index
                .get(&params.exp(pk, r_bar))
                .copied()
                .ok_or(MixnetError::InconsistentReveal(i))
        })
        .collect()
}

/// Checks a published chain against revealed exponents: the generators
/// chain from `g`, and each column is the previous one raised to `r_k` as a
/// multiset (permutations stay secret).
pub fn verify_revealed_chain(
    params: &GroupParams,
    input: &[GroupElement],
    out: &MixOutput,
    exponents: &[Scalar],
) -> bool {
    if exponents.len() != out.columns.len() || exponents.len() != out.per_server_generators.len() {
        return false;
    }
    let mut gen = params.generator();
    let mut prev = input.to_vec();
    for ((column, next_gen), r) in out.columns.iter().zip(&out.per_server_generators).zip(exponents) {
        gen = params.exp(&gen, r);
        if &gen != next_gen || column.len() != prev.len() {
            return false;
        }
        let mut expected: Vec<GroupElement> = prev.iter().map(|x| params.exp(x, r)).collect();
        let mut got = column.clone();
        expected.sort();
        got.sort();
        if expected != got {
            return false;
        }
        prev = column.clone();
    }
    true
}
