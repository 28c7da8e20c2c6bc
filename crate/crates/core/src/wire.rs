//! Tagged tuples of length-prefixed big-endian integers.
//!
//! Layout: `tag (1 byte)` then, per field, `len (u16 BE)` followed by `len`
//! bytes of the value in minimal big-endian form (zero encodes as `len = 0`).

use thiserror::Error;

pub const TAG_LEVEL1: u8 = 0x01;
pub const TAG_LEVEL2: u8 = 0x02;
pub const TAG_REKEY: u8 = 0x03;
pub const TAG_PUBKEY: u8 = 0x04;
pub const TAG_PROOF: u8 = 0x05;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DecodeError {
    #[error("input truncated")]
    Truncated,
    #[error("expected tag {expected:#04x}, found {found:#04x}")]
    WrongTag { expected: u8, found: u8 },
    #[error("integer field is {0} bytes, at most 8 supported")]
    FieldTooWide(usize),
    #[error("integer field has a leading zero byte")]
    NonCanonical,
    #[error("value {0} is outside the group")]
    OutOfRange(u64),
    #[error("{0} trailing bytes")]
    TrailingBytes(usize),
}

pub(crate) fn encode(tag: u8, fields: &[u64]) -> Vec<u8> {
    let mut out = vec![tag];
    for &v in fields {
        let bytes = v.to_be_bytes();
        let skip = bytes.iter().take_while(|&&b| b == 0).count();
        let body = &bytes[skip..];
        out.extend_from_slice(&(body.len() as u16).to_be_bytes());
        out.extend_from_slice(body);
    }
    out
}

/// Reads a tagged tuple of `N` integers from the front of `input`, returning
/// the values and the number of bytes consumed.
pub(crate) fn decode_prefix<const N: usize>(
    tag: u8,
    input: &[u8],
) -> Result<([u64; N], usize), DecodeError> {
    let (&found, mut rest) = input.split_first().ok_or(DecodeError::Truncated)?;
    if found != tag {
        return Err(DecodeError::WrongTag {
            expected: tag,
            found,
        });
    }
    let mut values = [0u64; N];
    for slot in values.iter_mut() {
        if rest.len() < 2 {
            return Err(DecodeError::Truncated);
        }
        let len = u16::from_be_bytes([rest[0], rest[1]]) as usize;
        rest = &rest[2..];
        if len > 8 {
            return Err(DecodeError::FieldTooWide(len));
        }
        if rest.len() < len {
            return Err(DecodeError::Truncated);
        }
        let (body, tail) = rest.split_at(len);
        if body.first() == Some(&0) {
            return Err(DecodeError::NonCanonical);
        }
        let mut buf = [0u8; 8];
        buf[8 - len..].copy_from_slice(body);
        *slot = u64::from_be_bytes(buf);
        rest = tail;
    }
    Ok((values, input.len() - rest.len()))
}

/// Like [`decode_prefix`] but the tuple must span the whole input.
pub(crate) fn decode_exact<const N: usize>(tag: u8, input: &[u8]) -> Result<[u64; N], DecodeError> {
    let (values, used) = decode_prefix::<N>(tag, input)?;
    if used != input.len() {
        return Err(DecodeError::TrailingBytes(input.len() - used));
    }
    Ok(values)
}
