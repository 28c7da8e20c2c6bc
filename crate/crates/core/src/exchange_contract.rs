//! Escrow contract for one sale of sealed identity data.
//!
//! ```text
//! AwaitingDeposits --both paid--> AwaitingKey --seller rk--> AwaitingProof --valid proof--> Settled
//!        |                             |                           |
//!        +--timeout: refund payers     +--timeout------------------+--> Forfeited (deposits to sink)
//! ```
//!
//! The seller deposits `d_s`; the buyer deposits `d_b` plus the price `c`.
//! A window is open while `height < deadline`; from the deadline on, anyone
//! may call [`ExchangeContract::on_timeout`].

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cas_store::Digest;
use crate::ledger::{Address, Ledger, LedgerError};
use crate::pre::ReEncryptionKey;
use crate::zkpok::{self, Commitment, KnowledgeProof};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ContractError {
    #[error("price must be positive")]
    ZeroPrice,
    #[error("{party} deposit {deposit} must exceed the price {price}")]
    DepositTooSmall {
        party: &'static str,
        deposit: u64,
        price: u64,
    },
    #[error("deadlines must strictly increase from the deployment height")]
    DeadlinesOutOfOrder,
    #[error("seller and buyer must be distinct")]
    SamePartyTwice,
    #[error("operation not allowed in phase {0}")]
    WrongPhase(Phase),
    #[error("{0} is not allowed to do this")]
    Unauthorized(Address),
    #[error("wrong amount: expected {expected}, got {got}")]
    WrongAmount { expected: u64, got: u64 },
    #[error("{0} already deposited")]
    AlreadyDeposited(Address),
    #[error("re-encryption key already submitted")]
    AlreadySubmitted,
    #[error("deadline {deadline} passed (height {height})")]
    WindowClosed { deadline: u64, height: u64 },
    #[error(transparent)]
    Ledger(#[from] LedgerError),
}

pub type Result<T> = std::result::Result<T, ContractError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Phase {
    AwaitingDeposits,
    AwaitingKey,
    AwaitingProof,
    Settled,
    Forfeited,
}

impl Phase {
    pub fn is_terminal(self) -> bool {
        matches!(self, Phase::Settled | Phase::Forfeited)
    }
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// How a `Forfeited` contract was closed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Forfeiture {
    /// Deposit window lapsed; whoever paid was refunded.
    DepositWindowRefund,
    /// A party stalled after both deposits; deposits went to the sink.
    Blocked,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExchangeParams {
    pub seller: Address,
    pub buyer: Address,
    pub price: u64,
    pub deposit_seller: u64,
    pub deposit_buyer: u64,
    pub commitment: Commitment,
    pub ciphertext_digest: Digest,
    /// Exchange nonce, part of the proof context.
    pub nonce: u64,
    pub timeout_deposit: u64,
    pub timeout_key: u64,
    pub timeout_proof: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContractState {
    pub phase: Phase,
    pub escrow: u64,
    pub rekey: Option<ReEncryptionKey>,
    pub seller_paid: bool,
    pub buyer_paid: bool,
    pub rekey_height: Option<u64>,
    pub forfeiture: Option<Forfeiture>,
}

/// One line of the transition log.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Event {
    pub height: u64,
    pub from: Option<Phase>,
    pub to: Phase,
    pub op: &'static str,
    pub caller: Address,
    pub amount: u64,
}

impl fmt::Display for Event {
    /// `height|phase_from|phase_to|op|caller|amount`
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let from = self.from.map_or_else(|| "-".to_owned(), |p| p.to_string());
        write!(
            f,
            "{}|{}|{}|{}|{}|{}",
            self.height, from, self.to, self.op, self.caller, self.amount
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProofVerdict {
    Accepted,
    Rejected,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TimeoutOutcome {
    /// No deadline has passed, or the contract is already closed.
    NotDue,
    Refunded { seller: u64, buyer: u64 },
    /// Deposits moved to the sink; the escrowed price went back to the buyer.
    Blocked { to_sink: u64, price_refund: u64 },
}

#[derive(Debug, Clone)]
pub struct ExchangeContract {
    address: Address,
    params: ExchangeParams,
    deployed_at: u64,
    state: ContractState,
    events: Vec<Event>,
}

impl ExchangeContract {
    /// Deploys at the ledger's current height and opens the escrow account.
    pub fn deploy(ledger: &mut Ledger, address: Address, params: ExchangeParams) -> Result<Self> {
        if params.price == 0 {
            return Err(ContractError::ZeroPrice);
        }
        for (party, deposit) in [("seller", params.deposit_seller), ("buyer", params.deposit_buyer)] {
            if deposit <= params.price {
                return Err(ContractError::DepositTooSmall {
                    party,
                    deposit,
                    price: params.price,
                });
            }
        }
        if params.seller == params.buyer {
            return Err(ContractError::SamePartyTwice);
        }
        let now = ledger.height();
        if !(now < params.timeout_deposit
            && params.timeout_deposit < params.timeout_key
            && params.timeout_key < params.timeout_proof)
        {
            return Err(ContractError::DeadlinesOutOfOrder);
        }
        for party in [&params.seller, &params.buyer] {
            ledger.balance(party)?;
        }
        ledger.open_account(address.clone())?;
        let seller = params.seller.clone();
        let mut contract = Self {
            address,
            params,
            deployed_at: now,
            state: ContractState {
                phase: Phase::AwaitingDeposits,
                escrow: 0,
                rekey: None,
                seller_paid: false,
                buyer_paid: false,
                rekey_height: None,
                forfeiture: None,
            },
            events: Vec::new(),
        };
        contract.log(now, None, "deploy", &seller, 0);
        Ok(contract)
    }

    pub fn address(&self) -> &Address {
        &self.address
    }

    pub fn params(&self) -> &ExchangeParams {
        &self.params
    }

    pub fn state(&self) -> &ContractState {
        &self.state
    }

    pub fn phase(&self) -> Phase {
        self.state.phase
    }

    pub fn deployed_at(&self) -> u64 {
        self.deployed_at
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    /// The transition log, one event per line.
    pub fn trace(&self) -> String {
        self.events.iter().map(|e| format!("{e}\n")).collect()
    }

    /// Context string proofs for this contract must be bound to.
    pub fn proof_context(&self) -> Vec<u8> {
        zkpok::proof_context(self.address.as_bytes(), self.params.nonce)
    }

    /// Deadline of the current phase, if it has one.
    pub fn current_deadline(&self) -> Option<u64> {
        match self.state.phase {
            Phase::AwaitingDeposits => Some(self.params.timeout_deposit),
            Phase::AwaitingKey => Some(self.params.timeout_key),
            Phase::AwaitingProof => Some(self.params.timeout_proof),
            Phase::Settled | Phase::Forfeited => None,
        }
    }

    fn log(&mut self, height: u64, from: Option<Phase>, op: &'static str, caller: &Address, amount: u64) {
        self.events.push(Event {
            height,
            from,
            to: self.state.phase,
            op,
            caller: caller.clone(),
            amount,
        });
    }

    fn expect_phase(&self, phase: Phase) -> Result<()> {
        if self.state.phase == phase {
            Ok(())
        } else {
            Err(ContractError::WrongPhase(self.state.phase))
        }
    }

    fn expect_open(&self, ledger: &Ledger, deadline: u64) -> Result<()> {
        let height = ledger.height();
        if height >= deadline {
            Err(ContractError::WindowClosed { deadline, height })
        } else {
            Ok(())
        }
    }

    fn pay_out(&mut self, ledger: &mut Ledger, to: &Address, amount: u64) -> Result<()> {
        if amount > 0 {
            ledger.transfer(&self.address, to, amount)?;
            self.state.escrow -= amount;
        }
        Ok(())
    }

    /// Seller pays exactly `d_s`, buyer exactly `d_b + c`.
    pub fn deposit(&mut self, ledger: &mut Ledger, party: &Address, amount: u64) -> Result<()> {
        self.expect_phase(Phase::AwaitingDeposits)?;
        self.expect_open(ledger, self.params.timeout_deposit)?;
        let (expected, already) = if *party == self.params.seller {
            (self.params.deposit_seller, self.state.seller_paid)
        } else if *party == self.params.buyer {
            (self.params.deposit_buyer + self.params.price, self.state.buyer_paid)
        } else {
            return Err(ContractError::Unauthorized(party.clone()));
        };
        if already {
            return Err(ContractError::AlreadyDeposited(party.clone()));
        }
        if amount != expected {
            return Err(ContractError::WrongAmount {
                expected,
                got: amount,
            });
        }
        ledger.transfer(party, &self.address, amount)?;
        self.state.escrow += amount;
        if *party == self.params.seller {
            self.state.seller_paid = true;
        } else {
            self.state.buyer_paid = true;
        }
        let from = self.state.phase;
        if self.state.seller_paid && self.state.buyer_paid {
            self.state.phase = Phase::AwaitingKey;
        }
        self.log(ledger.height(), Some(from), "deposit", party, amount);
        Ok(())
    }

    /// Records the seller's re-encryption key. The key is public; only the
    /// buyer's secret key makes it useful.
    pub fn submit_rekey(&mut self, ledger: &Ledger, caller: &Address, rk: ReEncryptionKey) -> Result<()> {
        if self.state.rekey.is_some() {
            return Err(ContractError::AlreadySubmitted);
        }
        self.expect_phase(Phase::AwaitingKey)?;
        if *caller != self.params.seller {
            return Err(ContractError::Unauthorized(caller.clone()));
        }
        self.expect_open(ledger, self.params.timeout_key)?;
        self.state.rekey = Some(rk);
        self.state.rekey_height = Some(ledger.height());
        self.state.phase = Phase::AwaitingProof;
        self.log(ledger.height(), Some(Phase::AwaitingKey), "submit_rekey", caller, 0);
        Ok(())
    }

    /// Read-only access to the stored key once it has been submitted.
    pub fn get_rekey(&self) -> Result<ReEncryptionKey> {
        self.expect_phase(Phase::AwaitingProof)?;
        Ok(self.state.rekey.expect("AwaitingProof implies a stored key"))
    }

    /// Verifies the buyer's proof against the stored commitment. On success,
    /// pays `c + d_s` to the seller and `d_b` back to the buyer. A failing
    /// proof leaves the state untouched so the buyer may retry in time.
    pub fn submit_proof(&mut self, ledger: &mut Ledger, caller: &Address, proof: &KnowledgeProof) -> Result<ProofVerdict> {
        self.expect_phase(Phase::AwaitingProof)?;
        if *caller != self.params.buyer {
            return Err(ContractError::Unauthorized(caller.clone()));
        }
        self.expect_open(ledger, self.params.timeout_proof)?;
        if !zkpok::verify(proof, &self.params.commitment, &self.proof_context()) {
            self.log(ledger.height(), Some(Phase::AwaitingProof), "reject_proof", caller, 0);
            return Ok(ProofVerdict::Rejected);
        }
        let seller = self.params.seller.clone();
        let buyer = self.params.buyer.clone();
        self.pay_out(ledger, &seller, self.params.price + self.params.deposit_seller)?;
        self.pay_out(ledger, &buyer, self.params.deposit_buyer)?;
        debug_assert_eq!(self.state.escrow, 0);
        self.state.phase = Phase::Settled;
        self.log(ledger.height(), Some(Phase::AwaitingProof), "settle", caller, self.params.price);
        Ok(ProofVerdict::Accepted)
    }

    /// Permissionless deadline enforcement at the ledger's current height.
    pub fn on_timeout(&mut self, ledger: &mut Ledger, caller: &Address) -> Result<TimeoutOutcome> {
        let Some(deadline) = self.current_deadline() else {
            return Ok(TimeoutOutcome::NotDue);
        };
        if ledger.height() < deadline {
            return Ok(TimeoutOutcome::NotDue);
        }
        let from = self.state.phase;
        let outcome = if from == Phase::AwaitingDeposits {
            let seller = self.params.seller.clone();
            let buyer = self.params.buyer.clone();
            let seller_refund = if self.state.seller_paid { self.params.deposit_seller } else { 0 };
            let buyer_refund = if self.state.buyer_paid {
                self.params.deposit_buyer + self.params.price
            } else {
                0
            };
            self.pay_out(ledger, &seller, seller_refund)?;
            self.pay_out(ledger, &buyer, buyer_refund)?;
            self.state.forfeiture = Some(Forfeiture::DepositWindowRefund);
            TimeoutOutcome::Refunded {
                seller: seller_refund,
                buyer: buyer_refund,
            }
        } else {
            let buyer = self.params.buyer.clone();
            let to_sink = self.params.deposit_seller + self.params.deposit_buyer;
            self.pay_out(ledger, &Address::sink(), to_sink)?;
            self.pay_out(ledger, &buyer, self.params.price)?;
            self.state.forfeiture = Some(Forfeiture::Blocked);
            TimeoutOutcome::Blocked {
                to_sink,
                price_refund: self.params.price,
            }
        };
        debug_assert_eq!(self.state.escrow, 0);
        self.state.phase = Phase::Forfeited;
        let moved = match outcome {
            TimeoutOutcome::Refunded { seller, buyer } => seller + buyer,
            TimeoutOutcome::Blocked { to_sink, .. } => to_sink,
            TimeoutOutcome::NotDue => 0,
        };
        self.log(ledger.height(), Some(from), "timeout", caller, moved);
        Ok(outcome)
    }
}
