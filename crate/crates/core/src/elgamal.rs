//! Hashed ElGamal KEM with an authenticated symmetric body.
//!
//! The ephemeral value is `gen^e` and the shared secret `pk^e`, so a key
//! pair `(sk, gen^sk)` decrypts for any base `gen`. In particular a
//! pseudonym `h^sk` is an encryption key for the same `sk` under base `h`.

use chacha20poly1305::aead::{Aead, KeyInit, Payload};
use chacha20poly1305::{ChaCha20Poly1305, Key, Nonce};
use rand::RngCore;
use sha2::{Digest, Sha256};

use crate::encoding::{Canonical, Decoder, Encoder};
use crate::error::{CryptoError, DecodeError};
use crate::group::{GroupElement, GroupParams, Scalar};

const KEM_DOMAIN: &[u8] = b"crex/hashed-elgamal/v1";
const TAG_LEN: usize = 16;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ciphertext {
    pub ephemeral: GroupElement,
    pub body: Vec<u8>,
    pub tag: Vec<u8>,
}

fn derive_key(params: &GroupParams, gen: &GroupElement, ephemeral: &GroupElement, shared: &GroupElement) -> Key {
    let mut h = Sha256::new();
    h.update(KEM_DOMAIN);
    for x in [gen, ephemeral, shared] {
        let bytes = params.element_to_bytes(x);
        h.update((bytes.len() as u32).to_be_bytes());
        h.update(bytes);
    }
    Key::clone_from_slice(&h.finalize())
}

fn aad(params: &GroupParams, gen: &GroupElement, ephemeral: &GroupElement) -> Vec<u8> {
    let mut out = params.element_to_bytes(gen);
    out.extend(params.element_to_bytes(ephemeral));
    out
}

pub fn encrypt<R: RngCore + ?Sized>(
    params: &GroupParams,
    pk: &GroupElement,
    gen: &GroupElement,
    msg: &[u8],
    rng: &mut R,
) -> Ciphertext {
    let e = params.random_nonzero_scalar(rng);
    let ephemeral = params.exp(gen, &e);
    let shared = params.exp(pk, &e);
    let key = derive_key(params, gen, &ephemeral, &shared);
    // the key is single-use, so a fixed nonce is safe
    let mut sealed = ChaCha20Poly1305::new(&key)
        .encrypt(Nonce::from_slice(&[0u8; 12]), Payload { msg, aad: &aad(params, gen, &ephemeral) })
        .expect("in-memory encryption cannot fail");
    let tag = sealed.split_off(sealed.len() - TAG_LEN);
    Ciphertext { ephemeral, body: sealed, tag }
}

pub fn decrypt(
    params: &GroupParams,
    sk: &Scalar,
    gen: &GroupElement,
    ct: &Ciphertext,
) -> Result<Vec<u8>, CryptoError> {
    if ct.tag.len() != TAG_LEN {
        return Err(CryptoError::AuthFailure);
    }
    let shared = params.exp(&ct.ephemeral, sk);
    let key = derive_key(params, gen, &ct.ephemeral, &shared);
    let mut sealed = ct.body.clone();
    sealed.extend_from_slice(&ct.tag);
    ChaCha20Poly1305::new(&key)
        .decrypt(
            Nonce::from_slice(&[0u8; 12]),
            Payload { msg: &sealed, aad: &aad(params, gen, &ct.ephemeral) },
        )
        .map_err(|_| CryptoError::AuthFailure)
}

impl Canonical for Ciphertext {
    fn encode(&self, enc: &mut Encoder<'_>) {
        enc.element(&self.ephemeral).bytes(&self.body).bytes(&self.tag);
    }

    fn decode(dec: &mut Decoder<'_>) -> Result<Self, DecodeError> {
        Ok(Ciphertext {
            ephemeral: dec.element()?,
            body: dec.bytes()?.to_vec(),
            tag: dec.bytes()?.to_vec(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::GroupPreset;
    use crate::schnorr::keygen;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    #[test]
    fn roundtrip_and_wrong_key() {
        let params = GroupParams::preset(GroupPreset::Test16);
        let mut rng = ChaCha20Rng::seed_from_u64(3);
        let g = params.generator();
        for _ in 0..100 {
            let alice = keygen(&params, &mut rng);
            let mut bob = keygen(&params, &mut rng);
            while bob.sk == alice.sk {
                bob = keygen(&params, &mut rng);
            }
            let mut msg = vec![0u8; (rng.next_u32() % 64) as usize];
            rng.fill_bytes(&mut msg);
            let ct = encrypt(&params, &alice.pk, &g, &msg, &mut rng);
            assert_eq!(decrypt(&params, &alice.sk, &g, &ct).unwrap(), msg);
            assert_eq!(decrypt(&params, &bob.sk, &g, &ct), Err(CryptoError::AuthFailure));
        }
    }

    #[test]
    fn randomized_and_empty() {
        let params = GroupParams::preset(GroupPreset::Test16);
        let mut rng = ChaCha20Rng::seed_from_u64(4);
        let kp = keygen(&params, &mut rng);
        let g = params.generator();
        let a = encrypt(&params, &kp.pk, &g, b"same", &mut rng);
        let b = encrypt(&params, &kp.pk, &g, b"same", &mut rng);
        assert_ne!(a, b);
        let empty = encrypt(&params, &kp.pk, &g, b"", &mut rng);
        assert_eq!(decrypt(&params, &kp.sk, &g, &empty).unwrap(), b"");
    }

    #[test]
    fn truncated_body_fails() {
        let params = GroupParams::preset(GroupPreset::Test16);
        let mut rng = ChaCha20Rng::seed_from_u64(5);
        let kp = keygen(&params, &mut rng);
        let g = params.generator();
        let mut ct = encrypt(&params, &kp.pk, &g, b"hello world", &mut rng);
        ct.body.pop();
        assert_eq!(decrypt(&params, &kp.sk, &g, &ct), Err(CryptoError::AuthFailure));
        ct.tag.clear();
        assert_eq!(decrypt(&params, &kp.sk, &g, &ct), Err(CryptoError::AuthFailure));
    }

    #[test]
    fn pseudonym_key_decrypts_with_same_secret() {
        let params = GroupParams::preset(GroupPreset::Test16);
        let mut rng = ChaCha20Rng::seed_from_u64(6);
        let kp = keygen(&params, &mut rng);
        let h = params.exp_g(&params.scalar_u64(777));
        let pseudonym = kp.public_for(&params, &h);
        let ct = encrypt(&params, &pseudonym, &h, b"questions", &mut rng);
        assert_eq!(decrypt(&params, &kp.sk, &h, &ct).unwrap(), b"questions");
        // the base is bound into the key derivation
        assert!(decrypt(&params, &kp.sk, &params.generator(), &ct).is_err());
    }
}
