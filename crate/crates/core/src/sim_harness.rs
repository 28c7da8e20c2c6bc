//! End-to-end protocol runs with scripted seller and buyer strategies.
//!
//! A run seals the seller's identity document, stores it, deploys the escrow
//! contract, collects deposits, lets each agent act according to its strategy
//! and finally enforces the pending deadline. Money is read back from the
//! ledger; the information-value terms (`v_s`, `v_b`) are added on top
//! depending on whether the buyer actually obtained the committed data.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algebra::{seeded_rng, GroupParams, SimRng};
use crate::cas_store::{BlobStore, StoreError};
use crate::exchange_contract::{
    ContractError, ExchangeContract, ExchangeParams, Forfeiture, Phase, ProofVerdict,
};
use crate::game_analysis::{ActionProfile, BuyerAction, Cell, GameParams, Payoff, SellerAction};
use crate::ledger::{Address, Ledger, LedgerError};
use crate::pre::{self, hybrid, keygen, rekeygen, PreError, ReEncryptionKey, SealedPayload};
use crate::zkpok::{self, commit, Basis, Opening, ProofError};

pub const DEFAULT_GROUP_ORDER: u64 = 2_147_483_647;
const BLINDING_LEN: usize = 8;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Contract(#[from] ContractError),
    #[error(transparent)]
    Ledger(#[from] LedgerError),
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error(transparent)]
    Pre(#[from] PreError),
    #[error(transparent)]
    Proof(#[from] ProofError),
}

pub type Result<T> = std::result::Result<T, ScenarioError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SellerStrategy {
    HonestKey,
    /// Submits a well-formed key that is not the one for the buyer.
    CorruptKey,
    /// Never submits a key.
    WithholdKey,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BuyerStrategy {
    /// Decrypts and proves whenever the payload opens the commitment.
    ProveIfAble,
    /// Decrypts but never submits a proof.
    NeverProve,
}

impl SellerStrategy {
    pub const ALL: [SellerStrategy; 3] = [
        SellerStrategy::HonestKey,
        SellerStrategy::CorruptKey,
        SellerStrategy::WithholdKey,
    ];
}

impl BuyerStrategy {
    pub const ALL: [BuyerStrategy; 2] = [BuyerStrategy::ProveIfAble, BuyerStrategy::NeverProve];
}

impl fmt::Display for SellerStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SellerStrategy::HonestKey => "honest-key",
            SellerStrategy::CorruptKey => "corrupt-key",
            SellerStrategy::WithholdKey => "withhold-key",
        })
    }
}

impl fmt::Display for BuyerStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BuyerStrategy::ProveIfAble => "prove-if-able",
            BuyerStrategy::NeverProve => "never-prove",
        })
    }
}

/// Contract and environment settings not covered by [`GameParams`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExchangeSettings {
    pub group_order: u64,
    pub seller_funds: u64,
    pub buyer_funds: u64,
    pub deposit_window: u64,
    pub key_window: u64,
    pub proof_window: u64,
    pub nonce: u64,
    /// Identity document being sold.
    pub payload: String,
}

impl Default for ExchangeSettings {
    fn default() -> Self {
        Self {
            group_order: DEFAULT_GROUP_ORDER,
            seller_funds: 1_000,
            buyer_funds: 1_000,
            deposit_window: 5,
            key_window: 5,
            proof_window: 5,
            nonce: 1,
            payload: "subject=alice;birth=1990-04-12;national-id=XK-5511;issuer=civil-registry".into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Strategies {
    pub seller: SellerStrategy,
    pub buyer: BuyerStrategy,
}

impl Default for Strategies {
    fn default() -> Self {
        Self {
            seller: SellerStrategy::HonestKey,
            buyer: BuyerStrategy::ProveIfAble,
        }
    }
}

/// Scenario configuration document.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default)]
    pub seed: u64,
    pub game: GameParams,
    #[serde(default)]
    pub exchange: ExchangeSettings,
    #[serde(default)]
    pub strategies: Strategies,
}

impl ScenarioConfig {
    pub fn new(game: GameParams, seed: u64) -> Self {
        Self {
            seed,
            game,
            exchange: ExchangeSettings::default(),
            strategies: Strategies::default(),
        }
    }

    fn validate(&self) -> Result<GroupParams> {
        let g = &self.game;
        let x = &self.exchange;
        let cfg = |m: String| Err(ScenarioError::Config(m));
        let group = GroupParams::setup(x.group_order).map_err(|e| ScenarioError::Config(e.to_string()))?;
        if g.price == 0 {
            return cfg("price must be positive".into());
        }
        if !g.deposits_exceed_price() {
            return cfg(format!(
                "deposits must exceed the price (c={}, d_s={}, d_b={})",
                g.price, g.deposit_seller, g.deposit_buyer
            ));
        }
        if x.seller_funds < g.deposit_seller {
            return cfg(format!("seller funds {} cannot cover d_s={}", x.seller_funds, g.deposit_seller));
        }
        if x.buyer_funds < g.deposit_buyer.saturating_add(g.price) {
            return cfg(format!(
                "buyer funds {} cannot cover d_b + c = {}",
                x.buyer_funds,
                g.deposit_buyer.saturating_add(g.price)
            ));
        }
        if x.deposit_window < 3 || x.key_window == 0 || x.proof_window == 0 {
            return cfg("deposit window must be at least 3 blocks, key and proof windows at least 1".into());
        }
        if x.payload.is_empty() {
            return cfg("payload must not be empty".into());
        }
        Ok(group)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartyOutcome {
    /// Ledger balance change over the run.
    pub monetary: Payoff,
    /// Information-value term: `+v_b` / `-v_s` on delivery, `+v_s` retained otherwise.
    pub information: Payoff,
    pub utility: Payoff,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScenarioResult {
    pub seed: u64,
    pub seller_strategy: SellerStrategy,
    pub buyer_strategy: BuyerStrategy,
    pub phase: Phase,
    pub forfeiture: Option<Forfeiture>,
    /// The buyer decrypted a payload that opens the on-contract commitment.
    pub delivered: bool,
    pub proof_submitted: bool,
    /// Why a willing buyer could not prove, if it could not.
    pub proof_failure: Option<String>,
    /// Profile the run realized: confirmation means settlement.
    pub realized: ActionProfile,
    pub buyer: PartyOutcome,
    pub seller: PartyOutcome,
    pub sink_delta: Payoff,
    pub supply_before: u64,
    pub supply_after: u64,
    pub ledger_state_hash: String,
    /// Contract transition log, one line per event.
    #[serde(skip)]
    pub trace: String,
}

impl ScenarioResult {
    pub fn utilities(&self) -> Cell {
        Cell {
            buyer: self.buyer.utility,
            seller: self.seller.utility,
        }
    }

    /// Buyer, seller and sink balance changes sum to zero.
    pub fn conserves_money(&self) -> bool {
        self.buyer.monetary + self.seller.monetary + self.sink_delta == 0 && self.supply_before == self.supply_after
    }
}

struct Delivery {
    delivered: bool,
    opening: Option<Opening>,
}

/// Splits a decrypted body into blinding and document and checks it against
/// the contract commitment.
fn inspect_body(group: &GroupParams, body: &[u8], contract: &ExchangeContract) -> Delivery {
    if body.len() < BLINDING_LEN {
        return Delivery {
            delivered: false,
            opening: None,
        };
    }
    let (blind, doc) = body.split_at(BLINDING_LEN);
    let s = group.scalar(u64::from_be_bytes(blind.try_into().expect("8 bytes")));
    let opening = Opening::for_data(group, doc, s);
    let delivered = opening.opens(&contract.params().commitment);
    Delivery {
        delivered,
        opening: delivered.then_some(opening),
    }
}

fn wrong_rekey(group: &GroupParams, honest: &ReEncryptionKey, rng: &mut SimRng) -> ReEncryptionKey {
    loop {
        let rk = group.random_element(rng);
        if rk != honest.rk {
            return ReEncryptionKey { rk, ..*honest };
        }
    }
}

/// Executes one protocol run.
pub fn run_scenario(config: &ScenarioConfig, seller_strategy: SellerStrategy, buyer_strategy: BuyerStrategy) -> Result<ScenarioResult> {
    let group = config.validate()?;
    let game = &config.game;
    let settings = &config.exchange;
    let mut rng = seeded_rng(config.seed);

    let seller = Address::new("seller");
    let buyer = Address::new("buyer");
    let keeper = Address::new("keeper");
    let seller_keys = keygen(&group, &mut rng);
    let buyer_keys = keygen(&group, &mut rng);

    // Step 1: seal the document under the seller's own key and store it.
    let document = settings.payload.as_bytes();
    let blinding = group.random_exponent(&mut rng);
    let opening = Opening::for_data(&group, document, blinding);
    let commitment = commit(&opening.k, &opening.s, &Basis::standard(&group))?;
    let mut body = blinding.value().to_be_bytes().to_vec();
    body.extend_from_slice(document);
    let sealed = pre::seal(&seller_keys.pk, &body, &mut rng)?;
    let mut store = BlobStore::in_memory();
    let ciphertext_digest = store.put(&sealed.to_bytes())?;

    let mut ledger = Ledger::genesis([
        (seller.clone(), settings.seller_funds),
        (buyer.clone(), settings.buyer_funds),
    ])?;
    let supply_before = ledger.supply();

    // Step 2: deploy.
    let timeout_deposit = ledger.height() + settings.deposit_window;
    let timeout_key = timeout_deposit + settings.key_window;
    let timeout_proof = timeout_key + settings.proof_window;
    let mut contract = ExchangeContract::deploy(
        &mut ledger,
        Address::new(format!("exchange-{}", settings.nonce)),
        ExchangeParams {
            seller: seller.clone(),
            buyer: buyer.clone(),
            price: game.price,
            deposit_seller: game.deposit_seller,
            deposit_buyer: game.deposit_buyer,
            commitment,
            ciphertext_digest,
            nonce: settings.nonce,
            timeout_deposit,
            timeout_key,
            timeout_proof,
        },
    )?;
    ledger.advance_height(1)?;

    // Steps 3-4: deposits.
    contract.deposit(&mut ledger, &seller, game.deposit_seller)?;
    ledger.advance_height(1)?;
    contract.deposit(&mut ledger, &buyer, game.deposit_buyer + game.price)?;
    ledger.advance_height(1)?;

    // Step 5: the seller's move.
    let honest = rekeygen(&seller_keys.sk, &buyer_keys.pk)?;
    match seller_strategy {
        SellerStrategy::HonestKey => contract.submit_rekey(&ledger, &seller, honest)?,
        SellerStrategy::CorruptKey => {
            let rk = wrong_rekey(&group, &honest, &mut rng);
            contract.submit_rekey(&ledger, &seller, rk)?
        }
        SellerStrategy::WithholdKey => {}
    }
    ledger.advance_height(1)?;

    // Steps 6-7: fetch, transform, decrypt, and maybe prove.
    let mut delivery = Delivery {
        delivered: false,
        opening: None,
    };
    let mut proof_submitted = false;
    let mut proof_failure = None;
    if contract.phase() == Phase::AwaitingProof {
        let rk = contract.get_rekey()?;
        let blob = store.get(&contract.params().ciphertext_digest)?;
        let fetched = SealedPayload::from_bytes(&group, &blob)?;
        let level2 = pre::reencrypt(&fetched.key, &rk)?;
        let plain = hybrid::open_level2(&level2, &fetched.body, &buyer_keys.sk)?;
        delivery = inspect_body(&group, &plain, &contract);
        if buyer_strategy == BuyerStrategy::ProveIfAble {
            match &delivery.opening {
                Some(opening) => {
                    let ctx = contract.proof_context();
                    let proof = zkpok::prove(opening, &contract.params().commitment, &ctx, &mut rng)?;
                    proof_submitted = true;
                    if contract.submit_proof(&mut ledger, &buyer, &proof)? == ProofVerdict::Rejected {
                        proof_failure = Some("contract rejected the proof".into());
                    }
                }
                None => proof_failure = Some("decrypted payload does not open the commitment".into()),
            }
        }
    } else if buyer_strategy == BuyerStrategy::ProveIfAble {
        proof_failure = Some("no re-encryption key was published".into());
    }

    // Deadline enforcement by a third-party keeper.
    if let Some(deadline) = contract.current_deadline() {
        if ledger.height() < deadline {
            ledger.advance_height(deadline - ledger.height())?;
        }
        contract.on_timeout(&mut ledger, &keeper)?;
    }
    debug_assert!(contract.phase().is_terminal());

    let delta = |addr: &Address, start: u64| -> Result<Payoff> { Ok(ledger.balance(addr)? as Payoff - start as Payoff) };
    let buyer_money = delta(&buyer, settings.buyer_funds)?;
    let seller_money = delta(&seller, settings.seller_funds)?;
    let sink_delta = delta(&Address::sink(), 0)?;
    let (vs, vb) = (game.value_seller as Payoff, game.value_buyer as Payoff);
    let (buyer_info, seller_info) = if delivery.delivered { (vb, -vs) } else { (0, vs) };

    Ok(ScenarioResult {
        seed: config.seed,
        seller_strategy,
        buyer_strategy,
        phase: contract.phase(),
        forfeiture: contract.state().forfeiture,
        delivered: delivery.delivered,
        proof_submitted,
        proof_failure,
        realized: ActionProfile::new(
            if contract.phase() == Phase::Settled {
                BuyerAction::Confirmation
            } else {
                BuyerAction::NoConfirmation
            },
            if delivery.delivered {
                SellerAction::CorrectSending
            } else {
                SellerAction::FailedSending
            },
        ),
        buyer: PartyOutcome {
            monetary: buyer_money,
            information: buyer_info,
            utility: buyer_money + buyer_info,
        },
        seller: PartyOutcome {
            monetary: seller_money,
            information: seller_info,
            utility: seller_money + seller_info,
        },
        sink_delta,
        supply_before,
        supply_after: ledger.circulating(),
        ledger_state_hash: ledger.state_hash(),
        trace: contract.trace(),
    })
}

/// Runs the strategies named in the config.
pub fn run_config(config: &ScenarioConfig) -> Result<ScenarioResult> {
    run_scenario(config, config.strategies.seller, config.strategies.buyer)
}

/// Every seller/buyer strategy pair run under one configuration.
#[derive(Debug, Clone)]
pub struct Sweep {
    pub runs: Vec<ScenarioResult>,
}

impl Sweep {
    /// Utilities per realized profile. `None` when two runs landing on the
    /// same profile disagree.
    pub fn empirical_matrix(&self) -> Option<BTreeMap<ActionProfile, Cell>> {
        let mut out = BTreeMap::new();
        for run in &self.runs {
            let prev = out.insert(run.realized, run.utilities());
            if prev.is_some_and(|p| p != run.utilities()) {
                return None;
            }
        }
        Some(out)
    }
}

pub fn sweep(config: &ScenarioConfig) -> Result<Sweep> {
    let mut runs = Vec::new();
    for s in SellerStrategy::ALL {
        for b in BuyerStrategy::ALL {
            runs.push(run_scenario(config, s, b)?);
        }
    }
    Ok(Sweep { runs })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reference() -> ScenarioConfig {
        ScenarioConfig::new(GameParams::new(10, 15, 15, 10, 10), 42)
    }

    #[test]
    fn honest_exchange_settles_at_zero_utility() {
        let r = run_scenario(&reference(), SellerStrategy::HonestKey, BuyerStrategy::ProveIfAble).unwrap();
        assert_eq!(r.phase, Phase::Settled);
        assert!(r.delivered && r.proof_submitted);
        assert_eq!(r.buyer.monetary, -10);
        assert_eq!(r.seller.monetary, 10);
        assert_eq!(r.utilities(), Cell { buyer: 0, seller: 0 });
        assert!(r.conserves_money());
    }

    #[test]
    fn corrupt_key_forfeits() {
        let r = run_scenario(&reference(), SellerStrategy::CorruptKey, BuyerStrategy::ProveIfAble).unwrap();
        assert_eq!(r.phase, Phase::Forfeited);
        assert!(!r.delivered && !r.proof_submitted);
        assert!(r.proof_failure.is_some());
        assert_eq!(r.utilities(), Cell { buyer: -15, seller: -5 });
        assert_eq!(r.sink_delta, 30);
        assert!(r.conserves_money());
    }

    #[test]
    fn silent_buyer_forfeits_after_delivery() {
        let r = run_scenario(&reference(), SellerStrategy::HonestKey, BuyerStrategy::NeverProve).unwrap();
        assert_eq!(r.phase, Phase::Forfeited);
        assert!(r.delivered);
        assert_eq!(r.utilities(), Cell { buyer: -5, seller: -25 });
    }

    #[test]
    fn withheld_key_forfeits() {
        let r = run_scenario(&reference(), SellerStrategy::WithholdKey, BuyerStrategy::ProveIfAble).unwrap();
        assert_eq!(r.phase, Phase::Forfeited);
        assert_eq!(r.forfeiture, Some(Forfeiture::Blocked));
        assert_eq!(r.utilities(), Cell { buyer: -15, seller: -5 });
    }

    #[test]
    fn invalid_configs() {
        let mut c = reference();
        c.game.deposit_buyer = 10;
        assert!(matches!(run_config(&c), Err(ScenarioError::Config(_))));
        let mut c = reference();
        c.exchange.group_order = 12;
        assert!(matches!(run_config(&c), Err(ScenarioError::Config(_))));
        let mut c = reference();
        c.exchange.buyer_funds = 24;
        assert!(matches!(run_config(&c), Err(ScenarioError::Config(_))));
        let mut c = reference();
        c.exchange.payload.clear();
        assert!(matches!(run_config(&c), Err(ScenarioError::Config(_))));
    }

    #[test]
    fn runs_are_deterministic() {
        let a = sweep(&reference()).unwrap();
        let b = sweep(&reference()).unwrap();
        assert_eq!(a.runs, b.runs);
        for (x, y) in a.runs.iter().zip(&b.runs) {
            assert_eq!(x.trace, y.trace);
        }
    }
}
