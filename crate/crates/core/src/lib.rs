//! Fair exchange of certified identity data between mutually distrustful
//! parties.
//!
//! The seller stores a sealed identity document in a content-addressed store
//! and sells access through an escrow contract. Delivery happens by proxy
//! re-encryption; the buyer confirms receipt with a zero-knowledge proof of
//! knowledge of the committed data, and deposits make cheating unprofitable.
//!
//! Modules, bottom up:
//!
//! - [`algebra`]: pairing group (exponent-representation reference backend)
//! - [`pre`]: proxy re-encryption and hybrid payload sealing
//! - [`zkpok`]: Pedersen commitment and Fiat-Shamir proof of its opening
//! - [`cas_store`]: content-addressed blob store
//! - [`ledger`]: deterministic balances and block height
//! - [`exchange_contract`]: the escrow state machine
//! - [`game_analysis`]: payoff matrix and equilibria
//! - [`sim_harness`]: strategy-driven end-to-end runs

pub mod algebra;
pub mod cas_store;
pub mod exchange_contract;
pub mod game_analysis;
pub mod ledger;
pub mod pre;
pub mod sim_harness;
pub mod wire;
pub mod zkpok;
