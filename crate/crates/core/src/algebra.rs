//! Prime-order cyclic group `G = <g>` with a symmetric bilinear pairing
//! `e: G x G -> GT`, `e(g, g) = Z`.
//!
//! The reference backend stores every element by its discrete logarithm with
//! respect to the canonical generator (`g` for `G`, `Z` for `GT`). Group
//! multiplication is exponent addition mod `q` and the pairing is exponent
//! multiplication mod `q`. The algebra is exact at any order, which lets the
//! test suite run exhaustively at toy sizes, but it offers no hardness at all:
//! anybody can read off a discrete log. Do not use it to protect real data.

use std::fmt;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Smallest accepted group order.
pub const MIN_ORDER: u64 = 5;

/// Orders are kept below 2^63 so that residue addition never overflows `u64`.
pub const MAX_ORDER: u64 = 1 << 63;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AlgebraError {
    #[error("invalid group order {0}: must be a prime in [{MIN_ORDER}, 2^63)")]
    InvalidOrder(u64),
    #[error("operands belong to different groups (order {left} vs {right})")]
    DomainMismatch { left: u64, right: u64 },
    #[error("zero has no multiplicative inverse")]
    NoInverse,
}

pub type Result<T> = std::result::Result<T, AlgebraError>;

/// Deterministic generator used for every random draw in the crate.
pub type SimRng = ChaCha20Rng;

/// Builds the seeded generator for a replayable run.
pub fn seeded_rng(seed: u64) -> SimRng {
    ChaCha20Rng::seed_from_u64(seed)
}

fn check_domain(left: u64, right: u64) -> Result<()> {
    if left == right {
        Ok(())
    } else {
        Err(AlgebraError::DomainMismatch { left, right })
    }
}

fn add_mod(a: u64, b: u64, q: u64) -> u64 {
    let s = a + b;
    if s >= q {
        s - q
    } else {
        s
    }
}

fn sub_mod(a: u64, b: u64, q: u64) -> u64 {
    if a >= b {
        a - b
    } else {
        q - (b - a)
    }
}

fn mul_mod(a: u64, b: u64, q: u64) -> u64 {
    ((a as u128 * b as u128) % q as u128) as u64
}

/// Public parameters: the prime order `q`, generator `g` and `Z = e(g, g)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GroupParams {
    order: u64,
}

impl GroupParams {
    /// Creates the group of prime order `order`. Deterministic: the same order
    /// always yields the same canonical `g` and `Z`.
    pub fn setup(order: u64) -> Result<Self> {
        if !(MIN_ORDER..MAX_ORDER).contains(&order) || !primal_check::miller_rabin(order) {
            return Err(AlgebraError::InvalidOrder(order));
        }
        Ok(Self { order })
    }

    pub fn order(&self) -> u64 {
        self.order
    }

    /// Scalar `value mod q`.
    pub fn scalar(&self, value: u64) -> GroupScalar {
        GroupScalar {
            value: value % self.order,
            order: self.order,
        }
    }

    /// Scalar in `Z_q*`, as required for keys.
    pub fn nonzero_scalar(&self, value: u64) -> Result<GroupScalar> {
        let s = self.scalar(value);
        if s.is_zero() {
            Err(AlgebraError::NoInverse)
        } else {
            Ok(s)
        }
    }

    /// Reduces an arbitrary byte string (typically a hash output) into `Z_q`.
    /// Only the first 16 bytes are used; the bias is below 2^-64 for every
    /// supported order.
    pub fn scalar_from_bytes(&self, bytes: &[u8]) -> GroupScalar {
        let mut buf = [0u8; 16];
        let n = bytes.len().min(16);
        buf[..n].copy_from_slice(&bytes[..n]);
        let wide = u128::from_be_bytes(buf);
        GroupScalar {
            value: (wide % self.order as u128) as u64,
            order: self.order,
        }
    }

    /// Uniform draw from `Z_q*`.
    pub fn random_scalar<R: RngCore>(&self, rng: &mut R) -> GroupScalar {
        GroupScalar {
            value: rng.gen_range(1..self.order),
            order: self.order,
        }
    }

    /// Uniform draw from `Z_q`, zero included.
    pub fn random_exponent<R: RngCore>(&self, rng: &mut R) -> GroupScalar {
        GroupScalar {
            value: rng.gen_range(0..self.order),
            order: self.order,
        }
    }

    pub fn generator(&self) -> GroupElem {
        GroupElem {
            log: 1,
            order: self.order,
        }
    }

    pub fn identity(&self) -> GroupElem {
        GroupElem {
            log: 0,
            order: self.order,
        }
    }

    /// `Z = e(g, g)`.
    pub fn target_generator(&self) -> TargetElem {
        TargetElem {
            log: 1,
            order: self.order,
        }
    }

    pub fn target_identity(&self) -> TargetElem {
        TargetElem {
            log: 0,
            order: self.order,
        }
    }

    /// Uniformly random element of `G`.
    pub fn random_element<R: RngCore>(&self, rng: &mut R) -> GroupElem {
        self.element_from_exponent(self.random_exponent(rng))
    }

    /// `g^k`.
    pub fn element_from_exponent(&self, k: GroupScalar) -> GroupElem {
        GroupElem {
            log: k.value % self.order,
            order: self.order,
        }
    }

    /// `Z^k`.
    pub fn target_from_exponent(&self, k: GroupScalar) -> TargetElem {
        TargetElem {
            log: k.value % self.order,
            order: self.order,
        }
    }

    /// Embeds a message scalar `mu` as `Z^mu`.
    pub fn encode_message(&self, mu: GroupScalar) -> Result<TargetElem> {
        check_domain(self.order, mu.order)?;
        Ok(self.target_from_exponent(mu))
    }

    /// Inverse of [`encode_message`](Self::encode_message).
    pub fn decode_message(&self, m: &TargetElem) -> Result<GroupScalar> {
        check_domain(self.order, m.order)?;
        Ok(GroupScalar {
            value: m.log,
            order: self.order,
        })
    }

    /// Rebuilds a group element from its wire value, rejecting out-of-range input.
    pub fn element_from_repr(&self, repr: u64) -> Option<GroupElem> {
        (repr < self.order).then_some(GroupElem {
            log: repr,
            order: self.order,
        })
    }

    pub fn target_from_repr(&self, repr: u64) -> Option<TargetElem> {
        (repr < self.order).then_some(TargetElem {
            log: repr,
            order: self.order,
        })
    }

    pub fn scalar_from_repr(&self, repr: u64) -> Option<GroupScalar> {
        (repr < self.order).then_some(GroupScalar {
            value: repr,
            order: self.order,
        })
    }
}

impl fmt::Display for GroupParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "G(q={})", self.order)
    }
}

/// Residue mod `q`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GroupScalar {
    value: u64,
    order: u64,
}

impl GroupScalar {
    pub fn value(&self) -> u64 {
        self.value
    }

    pub fn params(&self) -> GroupParams {
        GroupParams { order: self.order }
    }

    pub fn is_zero(&self) -> bool {
        self.value == 0
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        check_domain(self.order, other.order)?;
        Ok(Self {
            value: add_mod(self.value, other.value, self.order),
            order: self.order,
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        check_domain(self.order, other.order)?;
        Ok(Self {
            value: sub_mod(self.value, other.value, self.order),
            order: self.order,
        })
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        check_domain(self.order, other.order)?;
        Ok(Self {
            value: mul_mod(self.value, other.value, self.order),
            order: self.order,
        })
    }

    pub fn neg(&self) -> Self {
        Self {
            value: sub_mod(0, self.value, self.order),
            order: self.order,
        }
    }

    /// Multiplicative inverse mod `q` by the extended Euclidean algorithm.
    pub fn inv(&self) -> Result<Self> {
        if self.value == 0 {
            return Err(AlgebraError::NoInverse);
        }
        let (mut old_r, mut r) = (self.value as i128, self.order as i128);
        let (mut old_s, mut s) = (1i128, 0i128);
        while r != 0 {
            let quot = old_r / r;
            (old_r, r) = (r, old_r - quot * r);
            (old_s, s) = (s, old_s - quot * s);
        }
        debug_assert_eq!(old_r, 1, "order is prime");
        Ok(Self {
            value: old_s.rem_euclid(self.order as i128) as u64,
            order: self.order,
        })
    }
}

/// Free-function form of [`GroupScalar::inv`].
pub fn inv_scalar(k: &GroupScalar) -> Result<GroupScalar> {
    k.inv()
}

impl fmt::Display for GroupScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)
    }
}

/// Element of the source group `G`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct GroupElem {
    log: u64,
    order: u64,
}

impl GroupElem {
    pub fn params(&self) -> GroupParams {
        GroupParams { order: self.order }
    }

    /// Wire value of the element. In this backend it is the discrete log base `g`.
    pub fn repr(&self) -> u64 {
        self.log
    }

    pub fn is_identity(&self) -> bool {
        self.log == 0
    }

    /// Group operation.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        check_domain(self.order, other.order)?;
        Ok(Self {
            log: add_mod(self.log, other.log, self.order),
            order: self.order,
        })
    }

    pub fn inverse(&self) -> Self {
        Self {
            log: sub_mod(0, self.log, self.order),
            order: self.order,
        }
    }

    /// `self^k`.
    pub fn pow(&self, k: &GroupScalar) -> Result<Self> {
        check_domain(self.order, k.order)?;
        Ok(Self {
            log: mul_mod(self.log, k.value, self.order),
            order: self.order,
        })
    }
}

impl fmt::Display for GroupElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "g^{}", self.log)
    }
}

/// Element of the pairing target group `GT`, which is also the message space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TargetElem {
    log: u64,
    order: u64,
}

impl TargetElem {
    pub fn params(&self) -> GroupParams {
        GroupParams { order: self.order }
    }

    /// Wire value; the discrete log base `Z` in this backend.
    pub fn repr(&self) -> u64 {
        self.log
    }

    pub fn is_identity(&self) -> bool {
        self.log == 0
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        check_domain(self.order, other.order)?;
        Ok(Self {
            log: add_mod(self.log, other.log, self.order),
            order: self.order,
        })
    }

    pub fn div(&self, other: &Self) -> Result<Self> {
        check_domain(self.order, other.order)?;
        Ok(Self {
            log: sub_mod(self.log, other.log, self.order),
            order: self.order,
        })
    }

    pub fn pow(&self, k: &GroupScalar) -> Result<Self> {
        check_domain(self.order, k.order)?;
        Ok(Self {
            log: mul_mod(self.log, k.value, self.order),
            order: self.order,
        })
    }
}

impl fmt::Display for TargetElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Z^{}", self.log)
    }
}

/// Exponentiation on either group.
pub trait Exp: Sized {
    fn exp(&self, k: &GroupScalar) -> Result<Self>;
}

impl Exp for GroupElem {
    fn exp(&self, k: &GroupScalar) -> Result<Self> {
        self.pow(k)
    }
}

impl Exp for TargetElem {
    fn exp(&self, k: &GroupScalar) -> Result<Self> {
        self.pow(k)
    }
}

/// `base^k` for `base` in `G` or `GT`.
pub fn exp<E: Exp>(base: &E, k: &GroupScalar) -> Result<E> {
    base.exp(k)
}

/// The bilinear map: `pair(g^a, g^b) = Z^(ab mod q)`.
pub fn pair(x: &GroupElem, y: &GroupElem) -> Result<TargetElem> {
    check_domain(x.order, y.order)?;
    Ok(TargetElem {
        log: mul_mod(x.log, y.log, x.order),
        order: x.order,
    })
}
