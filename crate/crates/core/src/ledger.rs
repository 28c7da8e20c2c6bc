//! Deterministic single-writer ledger: balances, logical height, and a sink
//! account that absorbs forfeited funds.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

/// Name of the unspendable account receiving forfeited deposits.
pub const SINK: &str = "sink";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LedgerError {
    #[error("address {0} already exists")]
    DuplicateAddress(Address),
    #[error("unknown address {0}")]
    UnknownAddress(Address),
    #[error("insufficient funds in {address}: balance {balance}, needed {needed}")]
    InsufficientFunds {
        address: Address,
        balance: u64,
        needed: u64,
    },
    #[error("transfer amount must be positive")]
    ZeroAmount,
    #[error("the sink account cannot spend")]
    SinkIsUnspendable,
    #[error("height must advance by at least one block")]
    ZeroAdvance,
    #[error("genesis supply overflows")]
    SupplyOverflow,
}

pub type Result<T> = std::result::Result<T, LedgerError>;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Address(String);

impl Address {
    pub fn new(id: impl Into<String>) -> Self {
        Self(id.into())
    }

    pub fn sink() -> Self {
        Self(SINK.to_owned())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn as_bytes(&self) -> &[u8] {
        self.0.as_bytes()
    }
}

impl fmt::Display for Address {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Default, Serialize, Deserialize)]
pub struct LedgerClock {
    pub height: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Receipt {
    pub from: Address,
    pub to: Address,
    pub amount: u64,
    pub height: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ledger {
    balances: BTreeMap<Address, u64>,
    clock: LedgerClock,
    supply: u64,
}

impl Ledger {
    /// Creates the ledger with the given balances plus an empty sink account.
    pub fn genesis(accounts: impl IntoIterator<Item = (Address, u64)>) -> Result<Self> {
        let mut balances = BTreeMap::new();
        balances.insert(Address::sink(), 0);
        let mut supply = 0u64;
        for (addr, balance) in accounts {
            if balances.contains_key(&addr) {
                return Err(LedgerError::DuplicateAddress(addr));
            }
            supply = supply.checked_add(balance).ok_or(LedgerError::SupplyOverflow)?;
            balances.insert(addr, balance);
        }
        Ok(Self {
            balances,
            clock: LedgerClock::default(),
            supply,
        })
    }

    /// Registers a zero-balance account, e.g. for a deployed contract.
    pub fn open_account(&mut self, addr: Address) -> Result<()> {
        if self.balances.contains_key(&addr) {
            return Err(LedgerError::DuplicateAddress(addr));
        }
        self.balances.insert(addr, 0);
        Ok(())
    }

    pub fn balance(&self, addr: &Address) -> Result<u64> {
        self.balances
            .get(addr)
            .copied()
            .ok_or_else(|| LedgerError::UnknownAddress(addr.clone()))
    }

    /// Total supply fixed at genesis.
    pub fn supply(&self) -> u64 {
        self.supply
    }

    /// Sum of all balances right now; always equals [`supply`](Self::supply).
    pub fn circulating(&self) -> u64 {
        self.balances.values().sum()
    }

    pub fn clock(&self) -> LedgerClock {
        self.clock
    }

    pub fn height(&self) -> u64 {
        self.clock.height
    }

    pub fn accounts(&self) -> impl Iterator<Item = (&Address, u64)> {
        self.balances.iter().map(|(a, b)| (a, *b))
    }

    pub fn transfer(&mut self, from: &Address, to: &Address, amount: u64) -> Result<Receipt> {
        if amount == 0 {
            return Err(LedgerError::ZeroAmount);
        }
        if from.as_str() == SINK {
            return Err(LedgerError::SinkIsUnspendable);
        }
        let balance = self.balance(from)?;
        if !self.balances.contains_key(to) {
            return Err(LedgerError::UnknownAddress(to.clone()));
        }
        if balance < amount {
            return Err(LedgerError::InsufficientFunds {
                address: from.clone(),
                balance,
                needed: amount,
            });
        }
        if from != to {
            *self.balances.get_mut(from).expect("checked") -= amount;
            *self.balances.get_mut(to).expect("checked") += amount;
        }
        Ok(Receipt {
            from: from.clone(),
            to: to.clone(),
            amount,
            height: self.clock.height,
        })
    }

    pub fn advance_height(&mut self, n: u64) -> Result<LedgerClock> {
        if n == 0 {
            return Err(LedgerError::ZeroAdvance);
        }
        self.clock.height += n;
        Ok(self.clock)
    }

    /// Canonical text dump: `height=<h>` then `<address> <balance>` per line,
    /// sorted by address.
    pub fn dump(&self) -> String {
        let mut out = format!("height={}\n", self.clock.height);
        for (addr, bal) in &self.balances {
            out.push_str(&format!("{addr} {bal}\n"));
        }
        out
    }

    /// SHA-256 of [`dump`](Self::dump), hex encoded.
    pub fn state_hash(&self) -> String {
        hex::encode(Sha256::digest(self.dump().as_bytes()))
    }
}
