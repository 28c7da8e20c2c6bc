//! Single-hop unidirectional proxy re-encryption over a symmetric pairing.
//!
//! ```text
//! keygen      sk = a <- Z_q*,           pk = g^a
//! encrypt     C_a  = (Z^r * m, g^(ra))
//! rekeygen    rk   = pk_B^(1/a) = g^(b/a)
//! reencrypt   C_b  = (Z^r * m, e(g^(ra), g^(b/a))) = (Z^r * m, Z^(rb))
//! decrypt     m    = (Z^r * m) / (Z^(rb))^(1/b)
//! ```
//!
//! Bulk payloads go through [`hybrid`]: the group message carries a content
//! key and the body is sealed under a keyed stream.

pub mod hybrid;

use rand::RngCore;
use thiserror::Error;

use crate::algebra::{pair, AlgebraError, GroupElem, GroupParams, GroupScalar, TargetElem};
use crate::wire::{self, DecodeError};

pub use hybrid::{keystream_xor, seal, SealedPayload};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PreError {
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error("malformed encoding: {0}")]
    Decode(#[from] DecodeError),
}

pub type Result<T> = std::result::Result<T, PreError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PublicKey(pub GroupElem);

impl PublicKey {
    pub fn element(&self) -> &GroupElem {
        &self.0
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        wire::encode(wire::TAG_PUBKEY, &[self.0.repr()])
    }

    pub fn from_bytes(params: &GroupParams, bytes: &[u8]) -> Result<Self> {
        let [pk] = wire::decode_exact::<1>(wire::TAG_PUBKEY, bytes)?;
        Ok(Self(element(params, pk)?))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KeyPair {
    pub sk: GroupScalar,
    pub pk: PublicKey,
}

impl KeyPair {
    /// Key pair for a known secret. Fails for `sk = 0`.
    pub fn from_secret(sk: GroupScalar) -> Result<Self> {
        if sk.is_zero() {
            return Err(AlgebraError::NoInverse.into());
        }
        let pk = sk.params().generator().pow(&sk)?;
        Ok(Self {
            sk,
            pk: PublicKey(pk),
        })
    }
}

/// First-level ciphertext `(Z^r * m, g^(ra))`, decryptable by the owner of `a`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Level1Ciphertext {
    pub c1: TargetElem,
    pub c2: GroupElem,
}

/// Second-level ciphertext `(Z^r * m, Z^(rb))`, produced by the proxy.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Level2Ciphertext {
    pub c1: TargetElem,
    pub c2: TargetElem,
}

/// Re-encryption key `g^(b/a)` from `from` (A) to `to` (B).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ReEncryptionKey {
    pub rk: GroupElem,
    pub from: PublicKey,
    pub to: PublicKey,
}

pub fn keygen<R: RngCore>(params: &GroupParams, rng: &mut R) -> KeyPair {
    KeyPair::from_secret(params.random_scalar(rng)).expect("random_scalar draws from Z_q*")
}

/// Encrypts `m` under `pk` with fresh randomness.
pub fn encrypt<R: RngCore>(pk: &PublicKey, m: &TargetElem, rng: &mut R) -> Result<Level1Ciphertext> {
    let r = pk.0.params().random_scalar(rng);
    encrypt_with_randomness(pk, m, &r)
}

/// Encryption with caller-chosen `r`.
pub fn encrypt_with_randomness(pk: &PublicKey, m: &TargetElem, r: &GroupScalar) -> Result<Level1Ciphertext> {
    let params = pk.0.params();
    let c1 = params.target_generator().pow(r)?.mul(m)?;
    let c2 = pk.0.pow(r)?;
    Ok(Level1Ciphertext { c1, c2 })
}

pub fn rekeygen(sk_a: &GroupScalar, pk_b: &PublicKey) -> Result<ReEncryptionKey> {
    let inv_a = sk_a.inv()?;
    let rk = pk_b.0.pow(&inv_a)?;
    let from = PublicKey(sk_a.params().generator().pow(sk_a)?);
    Ok(ReEncryptionKey { rk, from, to: *pk_b })
}

/// The proxy transform. Needs nothing but the ciphertext and the key.
pub fn reencrypt(c: &Level1Ciphertext, rk: &ReEncryptionKey) -> Result<Level2Ciphertext> {
    Ok(Level2Ciphertext {
        c1: c.c1,
        c2: pair(&c.c2, &rk.rk)?,
    })
}

pub fn decrypt_level2(c: &Level2Ciphertext, sk_b: &GroupScalar) -> Result<TargetElem> {
    let blind = c.c2.pow(&sk_b.inv()?)?;
    Ok(c.c1.div(&blind)?)
}

/// Owner-side decryption of a first-level ciphertext.
pub fn decrypt_level1(c: &Level1Ciphertext, sk_a: &GroupScalar) -> Result<TargetElem> {
    let inv_a = sk_a.inv()?;
    let blind = pair(&c.c2, &c.c2.params().generator())?.pow(&inv_a)?;
    Ok(c.c1.div(&blind)?)
}

fn element(params: &GroupParams, v: u64) -> Result<GroupElem> {
    params
        .element_from_repr(v)
        .ok_or(PreError::Decode(DecodeError::OutOfRange(v)))
}

fn target(params: &GroupParams, v: u64) -> Result<TargetElem> {
    params
        .target_from_repr(v)
        .ok_or(PreError::Decode(DecodeError::OutOfRange(v)))
}

impl Level1Ciphertext {
    pub fn to_bytes(&self) -> Vec<u8> {
        wire::encode(wire::TAG_LEVEL1, &[self.c1.repr(), self.c2.repr()])
    }

    pub fn from_bytes(params: &GroupParams, bytes: &[u8]) -> Result<Self> {
        let (c, used) = Self::decode_prefix(params, bytes)?;
        if used != bytes.len() {
            return Err(DecodeError::TrailingBytes(bytes.len() - used).into());
        }
        Ok(c)
    }

    pub(crate) fn decode_prefix(params: &GroupParams, bytes: &[u8]) -> Result<(Self, usize)> {
        let ([c1, c2], used) = wire::decode_prefix::<2>(wire::TAG_LEVEL1, bytes)?;
        Ok((
            Self {
                c1: target(params, c1)?,
                c2: element(params, c2)?,
            },
            used,
        ))
    }
}

impl Level2Ciphertext {
    pub fn to_bytes(&self) -> Vec<u8> {
        wire::encode(wire::TAG_LEVEL2, &[self.c1.repr(), self.c2.repr()])
    }

    pub fn from_bytes(params: &GroupParams, bytes: &[u8]) -> Result<Self> {
        let [c1, c2] = wire::decode_exact::<2>(wire::TAG_LEVEL2, bytes)?;
        Ok(Self {
            c1: target(params, c1)?,
            c2: target(params, c2)?,
        })
    }
}

impl ReEncryptionKey {
    pub fn to_bytes(&self) -> Vec<u8> {
        wire::encode(
            wire::TAG_REKEY,
            &[self.rk.repr(), self.from.0.repr(), self.to.0.repr()],
        )
    }

    pub fn from_bytes(params: &GroupParams, bytes: &[u8]) -> Result<Self> {
        let [rk, from, to] = wire::decode_exact::<3>(wire::TAG_REKEY, bytes)?;
        Ok(Self {
            rk: element(params, rk)?,
            from: PublicKey(element(params, from)?),
            to: PublicKey(element(params, to)?),
        })
    }
}
