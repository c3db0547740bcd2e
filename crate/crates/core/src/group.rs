//! Prime-order subgroup arithmetic modulo a safe prime.
//!
//! Every exponent in the protocol (long-term secret keys, mix exponents,
//! nonces, the receipt nonce) is a [`Scalar`] mod `q`, and every public value
//! (public keys, pseudonyms, mix generators) is a [`GroupElement`] of the
//! order-`q` subgroup of `Z_p^*`.

use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use num_bigint::{BigUint, RandBigInt};
use num_integer::Integer;
use num_traits::{One, Zero};
use rand::RngCore;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::GroupError;

/// Name of the hash function used for every challenge, KEM and digest.
pub const HASH_NAME: &str = "SHA-256";

/// RFC 3526 group 14 modulus.
const MODP2048_P: &str = "\
FFFFFFFFFFFFFFFFC90FDAA22168C234C4C6628B80DC1CD129024E088A67CC74\
020BBEA63B139B22514A08798E3404DDEF9519B3CD3A431B302B0A6DF25F1437\
4FE1356D6D51C245E485B576625E7EC6F44C42E9A637ED6B0BFF5CB6F406B7ED\
EE386BFB5A899FA5AE9F24117C4B1FE649286651ECE45B3DC2007CB8A163BF05\
98DA48361C55D39A69163FA8FD24CF5F83655D23DCA3AD961C62F356208552BB\
9ED529077096966D670C354E4ABC9804F1746C08CA18217C32905E462E36CE3B\
E39E772C180E86039B2783A2EC07A28FB5C55DF06F4C52C9DE2BCBF695581718\
3995497CEA956AE515D2261898FA051015728E5A8AACAA68FFFFFFFFFFFFFFFF";

/// Named group instantiations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GroupPreset {
    /// p = 23, q = 11, g = 2. Only useful for exhaustive and statistical tests.
    Micro11,
    /// 16-bit safe prime p = 65267, q = 32633.
    Test16,
    /// 64-bit safe prime, large enough that random collisions are negligible.
    Test64,
    /// RFC 3526 2048-bit MODP group with g = 2.
    Modp2048,
}

impl GroupPreset {
    pub const ALL: [GroupPreset; 4] = [
        GroupPreset::Micro11,
        GroupPreset::Test16,
        GroupPreset::Test64,
        GroupPreset::Modp2048,
    ];

    pub fn name(self) -> &'static str {
        match self {
            GroupPreset::Micro11 => "micro11",
            GroupPreset::Test16 => "test16",
            GroupPreset::Test64 => "test64",
            GroupPreset::Modp2048 => "modp2048",
        }
    }

    fn raw(self) -> (BigUint, BigUint) {
        match self {
            GroupPreset::Micro11 => (BigUint::from(23u32), BigUint::from(2u32)),
            GroupPreset::Test16 => (BigUint::from(65267u32), BigUint::from(4u32)),
            GroupPreset::Test64 => (BigUint::from(0xffff_ffff_ffff_fa43u64), BigUint::from(4u32)),
            GroupPreset::Modp2048 => (
                BigUint::parse_bytes(MODP2048_P.as_bytes(), 16).expect("valid hex constant"),
                BigUint::from(2u32),
            ),
        }
    }
}

impl fmt::Display for GroupPreset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for GroupPreset {
    type Err = GroupError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        GroupPreset::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| GroupError::UnknownPreset(s.to_string()))
    }
}

/// An exponent, always reduced mod `q`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Scalar(BigUint);

impl Scalar {
    pub fn value(&self) -> &BigUint {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }
}

impl fmt::Debug for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Scalar({})", self.0)
    }
}

/// A member of the order-`q` subgroup.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GroupElement(BigUint);

impl GroupElement {
    pub fn value(&self) -> &BigUint {
        &self.0
    }

    pub fn is_identity(&self) -> bool {
        self.0.is_one()
    }
}

impl fmt::Debug for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GroupElement({})", self.0)
    }
}

/// Description of a prime-order group `G_q` inside `Z_p^*`.
#[derive(Clone, PartialEq, Eq)]
pub struct GroupParams {
    p: BigUint,
    q: BigUint,
    g: BigUint,
    preset: Option<GroupPreset>,
    element_len: usize,
    scalar_len: usize,
}

impl fmt::Debug for GroupParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.preset {
            Some(preset) => write!(f, "GroupParams({preset})"),
            None => write!(f, "GroupParams(p={}, q={}, g={})", self.p, self.q, self.g),
        }
    }
}

fn is_probable_prime(n: &BigUint) -> bool {
    num_prime::nt_funcs::is_prime(n, None).probably()
}

impl GroupParams {
    /// Validates `(p, q, g)`: both moduli prime, `q | p - 1`, and `g` a
    /// non-trivial element of order `q`.
    pub fn new(p: BigUint, q: BigUint, g: BigUint) -> Result<Self, GroupError> {
        if p < BigUint::from(5u32) || q < BigUint::from(2u32) {
            return Err(GroupError::InvalidParams("modulus too small".into()));
        }
        if !(&p - 1u32).is_multiple_of(&q) {
            return Err(GroupError::InvalidParams("q does not divide p - 1".into()));
        }
        if !is_probable_prime(&p) || !is_probable_prime(&q) {
            return Err(GroupError::InvalidParams("p or q is not prime".into()));
        }
        if g.is_zero() || g.is_one() || g >= p || !g.modpow(&q, &p).is_one() {
            return Err(GroupError::InvalidParams("g does not generate the order-q subgroup".into()));
        }
        let element_len = byte_len(&p);
        let scalar_len = byte_len(&q);
        Ok(GroupParams { p, q, g, preset: None, element_len, scalar_len })
    }

    /// Returns a validated preset. Validation runs once per process.
    pub fn preset(preset: GroupPreset) -> GroupParams {
        static CACHE: [OnceLock<GroupParams>; 4] =
            [OnceLock::new(), OnceLock::new(), OnceLock::new(), OnceLock::new()];
        let slot = &CACHE[GroupPreset::ALL.iter().position(|p| *p == preset).unwrap()];
        slot.get_or_init(|| {
            let (p, g) = preset.raw();
            let q = (&p - 1u32) >> 1;
            let mut params = GroupParams::new(p, q, g).expect("preset parameters are valid");
            params.preset = Some(preset);
            params
        })
        .clone()
    }

    pub fn p(&self) -> &BigUint {
        &self.p
    }

    pub fn q(&self) -> &BigUint {
        &self.q
    }

    pub fn preset_id(&self) -> Option<GroupPreset> {
        self.preset
    }

    /// Width in bytes of a canonically encoded element.
    pub fn element_len(&self) -> usize {
        self.element_len
    }

    /// Width in bytes of a canonically encoded scalar.
    pub fn scalar_len(&self) -> usize {
        self.scalar_len
    }

    pub fn generator(&self) -> GroupElement {
        GroupElement(self.g.clone())
    }

    pub fn identity(&self) -> GroupElement {
        GroupElement(BigUint::one())
    }

    pub fn is_member(&self, x: &BigUint) -> bool {
        !x.is_zero() && x < &self.p && x.modpow(&self.q, &self.p).is_one()
    }

    /// Checked constructor: rejects anything outside `G_q`.
    pub fn element(&self, x: BigUint) -> Result<GroupElement, GroupError> {
        if self.is_member(&x) {
            Ok(GroupElement(x))
        } else {
            Err(GroupError::NotMember)
        }
    }

    pub fn element_u64(&self, x: u64) -> Result<GroupElement, GroupError> {
        self.element(BigUint::from(x))
    }

    pub fn scalar(&self, x: BigUint) -> Scalar {
        Scalar(x % &self.q)
    }

    pub fn scalar_u64(&self, x: u64) -> Scalar {
        self.scalar(BigUint::from(x))
    }

    pub fn random_scalar<R: RngCore + ?Sized>(&self, rng: &mut R) -> Scalar {
        Scalar(rng.gen_biguint_below(&self.q))
    }

    /// Uniform in `[1, q)`.
    pub fn random_nonzero_scalar<R: RngCore + ?Sized>(&self, rng: &mut R) -> Scalar {
        Scalar(rng.gen_biguint_range(&BigUint::one(), &self.q))
    }

    pub fn exp(&self, base: &GroupElement, e: &Scalar) -> GroupElement {
        GroupElement(base.0.modpow(&e.0, &self.p))
    }

    /// `g^e`.
    pub fn exp_g(&self, e: &Scalar) -> GroupElement {
        GroupElement(self.g.modpow(&e.0, &self.p))
    }

    pub fn mul(&self, a: &GroupElement, b: &GroupElement) -> GroupElement {
        GroupElement((&a.0 * &b.0) % &self.p)
    }

    pub fn inverse(&self, a: &GroupElement) -> GroupElement {
        // a^(q-1) = a^-1 inside G_q
        GroupElement(a.0.modpow(&(&self.q - 1u32), &self.p))
    }

    pub fn scalar_add(&self, a: &Scalar, b: &Scalar) -> Scalar {
        Scalar((&a.0 + &b.0) % &self.q)
    }

    pub fn scalar_sub(&self, a: &Scalar, b: &Scalar) -> Scalar {
        Scalar((&a.0 + &self.q - &b.0) % &self.q)
    }

    pub fn scalar_mul(&self, a: &Scalar, b: &Scalar) -> Scalar {
        Scalar((&a.0 * &b.0) % &self.q)
    }

    pub fn scalar_product<'a>(&self, xs: impl IntoIterator<Item = &'a Scalar>) -> Scalar {
        xs.into_iter()
            .fold(Scalar(BigUint::one()), |acc, x| self.scalar_mul(&acc, x))
    }

    /// Big-endian, left-padded to [`element_len`](Self::element_len).
    pub fn element_to_bytes(&self, x: &GroupElement) -> Vec<u8> {
        fixed_width(&x.0, self.element_len)
    }

    pub fn element_from_bytes(&self, bytes: &[u8]) -> Result<GroupElement, GroupError> {
        if bytes.len() != self.element_len {
            return Err(GroupError::BadLength { expected: self.element_len, got: bytes.len() });
        }
        self.element(BigUint::from_bytes_be(bytes))
    }

    pub fn scalar_to_bytes(&self, x: &Scalar) -> Vec<u8> {
        fixed_width(&x.0, self.scalar_len)
    }

    pub fn scalar_from_bytes(&self, bytes: &[u8]) -> Result<Scalar, GroupError> {
        if bytes.len() != self.scalar_len {
            return Err(GroupError::BadLength { expected: self.scalar_len, got: bytes.len() });
        }
        let v = BigUint::from_bytes_be(bytes);
        if v >= self.q {
            return Err(GroupError::ScalarOutOfRange);
        }
        Ok(Scalar(v))
    }

    /// Domain-separated hash onto `[0, q)`.
    ///
    /// The tag and each part are length-prefixed before hashing, and the
    /// digest is expanded with a block counter to 16 bytes beyond the width
    /// of `q` so the final reduction has negligible bias.
    pub fn hash_to_scalar(&self, domain_tag: &[u8], parts: &[&[u8]]) -> Scalar {
        let mut framed = Vec::new();
        push_framed(&mut framed, domain_tag);
        for part in parts {
            push_framed(&mut framed, part);
        }
        let wide = self.scalar_len + 16;
        let mut out = Vec::with_capacity(wide + 32);
        let mut counter = 0u32;
        while out.len() < wide {
            let mut h = Sha256::new();
            h.update(counter.to_be_bytes());
            h.update(&framed);
            out.extend_from_slice(&h.finalize());
            counter += 1;
        }
        out.truncate(wide);
        self.scalar(BigUint::from_bytes_be(&out))
    }
}

fn push_framed(buf: &mut Vec<u8>, bytes: &[u8]) {
    buf.extend_from_slice(&(bytes.len() as u32).to_be_bytes());
    buf.extend_from_slice(bytes);
}

fn byte_len(x: &BigUint) -> usize {
    (x.bits() as usize).div_ceil(8)
}

fn fixed_width(x: &BigUint, width: usize) -> Vec<u8> {
    let raw = x.to_bytes_be();
    let mut out = vec![0u8; width.saturating_sub(raw.len())];
    out.extend_from_slice(&raw);
    out
}
