//! Hybrid encapsulation for payloads larger than one group element.
//!
//! A random content key `mu` is encrypted as the message `Z^mu`; the body is
//! XORed with a SHA-256 counter-mode keystream derived from `mu`. The wire
//! form is the level-1 key ciphertext followed directly by the body bytes.

use rand::RngCore;
use sha2::{Digest, Sha256};

use super::{
    decrypt_level1, decrypt_level2, encrypt, Level1Ciphertext, Level2Ciphertext, PublicKey, Result,
};
use crate::algebra::{GroupParams, GroupScalar};

const STREAM_DOMAIN: &[u8] = b"idex/keystream/v1";

/// XORs `data` with the keystream of `key`. Applying it twice is the identity.
pub fn keystream_xor(key: &GroupScalar, data: &[u8]) -> Vec<u8> {
    let mut out = Vec::with_capacity(data.len());
    for (counter, chunk) in data.chunks(32).enumerate() {
        let block = Sha256::new()
            .chain_update(STREAM_DOMAIN)
            .chain_update(key.params().order().to_be_bytes())
            .chain_update(key.value().to_be_bytes())
            .chain_update((counter as u64).to_be_bytes())
            .finalize();
        out.extend(chunk.iter().zip(block.iter()).map(|(d, k)| d ^ k));
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SealedPayload {
    pub key: Level1Ciphertext,
    pub body: Vec<u8>,
}

/// Seals `plaintext` for the holder of `pk`.
pub fn seal<R: RngCore>(pk: &PublicKey, plaintext: &[u8], rng: &mut R) -> Result<SealedPayload> {
    let params = pk.element().params();
    let content_key = params.random_exponent(rng);
    let key = encrypt(pk, &params.encode_message(content_key)?, rng)?;
    Ok(SealedPayload {
        key,
        body: keystream_xor(&content_key, plaintext),
    })
}

impl SealedPayload {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = self.key.to_bytes();
        out.extend_from_slice(&self.body);
        out
    }

    pub fn from_bytes(params: &GroupParams, bytes: &[u8]) -> Result<Self> {
        let (key, used) = Level1Ciphertext::decode_prefix(params, bytes)?;
        Ok(Self {
            key,
            body: bytes[used..].to_vec(),
        })
    }

    /// Opens the payload with the key it was sealed under.
    pub fn open_level1(&self, sk: &GroupScalar) -> Result<Vec<u8>> {
        let m = decrypt_level1(&self.key, sk)?;
        let content_key = sk.params().decode_message(&m)?;
        Ok(keystream_xor(&content_key, &self.body))
    }
}

/// Opens a body whose key ciphertext has been re-encrypted to `sk`'s owner.
/// A wrong re-encryption key yields garbage rather than an error.
pub fn open_level2(key: &Level2Ciphertext, body: &[u8], sk: &GroupScalar) -> Result<Vec<u8>> {
    let m = decrypt_level2(key, sk)?;
    let content_key = sk.params().decode_message(&m)?;
    Ok(keystream_xor(&content_key, body))
}
