//! Schnorr signatures under an arbitrary generator, and non-interactive
//! Schnorr proofs of knowledge of a discrete logarithm.
//!
//! Long-term keys sign under `g`; pseudonym keys sign under the mix
//! generator `h`, since a pseudonym `h^sk` is a public key for base `h`.
//! Challenges are Fiat-Shamir hashes, domain-separated per use.

use rand::RngCore;

use crate::encoding::{Canonical, Decoder, Encoder};
use crate::error::{CryptoError, DecodeError};
use crate::group::{GroupElement, GroupParams, Scalar};

const SIG_DOMAIN: &[u8] = b"crex/schnorr-sig/v1";
const DLOG_DOMAIN: &[u8] = b"crex/dlog-proof/v1";

#[derive(Clone, PartialEq, Eq)]
pub struct KeyPair {
    pub sk: Scalar,
    pub pk: GroupElement,
}

impl std::fmt::Debug for KeyPair {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("KeyPair").field("pk", &self.pk).finish_non_exhaustive()
    }
}

impl KeyPair {
    pub fn from_secret(params: &GroupParams, sk: Scalar) -> Self {
        let pk = params.exp_g(&sk);
        KeyPair { sk, pk }
    }

    /// The key for base `gen`, e.g. a pseudonym `h^sk`.
    pub fn public_for(&self, params: &GroupParams, gen: &GroupElement) -> GroupElement {
        params.exp(gen, &self.sk)
    }
}

/// Fresh key pair with `sk` uniform in `[1, q)`.
pub fn keygen<R: RngCore + ?Sized>(params: &GroupParams, rng: &mut R) -> KeyPair {
    KeyPair::from_secret(params, params.random_nonzero_scalar(rng))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SchnorrSignature {
    pub generator: GroupElement,
    pub commitment: GroupElement,
    pub response: Scalar,
}

fn sig_challenge(
    params: &GroupParams,
    gen: &GroupElement,
    pk: &GroupElement,
    commitment: &GroupElement,
    msg: &[u8],
) -> Scalar {
    params.hash_to_scalar(
        SIG_DOMAIN,
        &[
            &params.element_to_bytes(gen),
            &params.element_to_bytes(pk),
            &params.element_to_bytes(commitment),
            msg,
        ],
    )
}

pub fn schnorr_sign<R: RngCore + ?Sized>(
    params: &GroupParams,
    sk: &Scalar,
    gen: &GroupElement,
    msg: &[u8],
    rng: &mut R,
) -> Result<SchnorrSignature, CryptoError> {
    if gen.is_identity() {
        return Err(CryptoError::DegenerateGenerator);
    }
    let pk = params.exp(gen, sk);
    let nonce = params.random_nonzero_scalar(rng);
    let commitment = params.exp(gen, &nonce);
    let c = sig_challenge(params, gen, &pk, &commitment, msg);
    let response = params.scalar_add(&nonce, &params.scalar_mul(&c, sk));
    Ok(SchnorrSignature { generator: gen.clone(), commitment, response })
}

pub fn schnorr_verify(
    params: &GroupParams,
    pk: &GroupElement,
    gen: &GroupElement,
    msg: &[u8],
    sig: &SchnorrSignature,
) -> bool {
    if gen.is_identity() || &sig.generator != gen {
        return false;
    }
    let c = sig_challenge(params, gen, pk, &sig.commitment, msg);
    params.exp(gen, &sig.response) == params.mul(&sig.commitment, &params.exp(pk, &c))
}

impl Canonical for SchnorrSignature {
    fn encode(&self, enc: &mut Encoder<'_>) {
        enc.element(&self.generator).element(&self.commitment).scalar(&self.response);
    }

    fn decode(dec: &mut Decoder<'_>) -> Result<Self, DecodeError> {
        Ok(SchnorrSignature {
            generator: dec.element()?,
            commitment: dec.element()?,
            response: dec.scalar()?,
        })
    }
}

/// Non-interactive proof of knowledge of `log_gen(pk)`, bound to a context.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DlogProof {
    pub commitment: GroupElement,
    pub response: Scalar,
}

fn dlog_challenge(
    params: &GroupParams,
    gen: &GroupElement,
    pk: &GroupElement,
    commitment: &GroupElement,
    context: &[u8],
) -> Scalar {
    params.hash_to_scalar(
        DLOG_DOMAIN,
        &[
            &params.element_to_bytes(gen),
            &params.element_to_bytes(pk),
            &params.element_to_bytes(commitment),
            context,
        ],
    )
}

pub fn dlog_prove<R: RngCore + ?Sized>(
    params: &GroupParams,
    sk: &Scalar,
    gen: &GroupElement,
    context: &[u8],
    rng: &mut R,
) -> Result<DlogProof, CryptoError> {
    if gen.is_identity() {
        return Err(CryptoError::DegenerateGenerator);
    }
    let pk = params.exp(gen, sk);
    let nonce = params.random_nonzero_scalar(rng);
    let commitment = params.exp(gen, &nonce);
    let c = dlog_challenge(params, gen, &pk, &commitment, context);
    let response = params.scalar_add(&nonce, &params.scalar_mul(&c, sk));
    Ok(DlogProof { commitment, response })
}

pub fn dlog_verify(
    params: &GroupParams,
    pk: &GroupElement,
    gen: &GroupElement,
    context: &[u8],
    proof: &DlogProof,
) -> bool {
    if gen.is_identity() {
        return false;
    }
    let c = dlog_challenge(params, gen, pk, &proof.commitment, context);
    params.exp(gen, &proof.response) == params.mul(&proof.commitment, &params.exp(pk, &c))
}

impl Canonical for DlogProof {
    fn encode(&self, enc: &mut Encoder<'_>) {
        enc.element(&self.commitment).scalar(&self.response);
    }

    fn decode(dec: &mut Decoder<'_>) -> Result<Self, DecodeError> {
        Ok(DlogProof { commitment: dec.element()?, response: dec.scalar()? })
    }
}
