//! Two-player strategic form of the exchange and its equilibria.
//!
//! Rows are buyer actions, columns seller actions, cells are
//! `(buyer payoff, seller payoff)`:
//!
//! ```text
//!                   CorrectSending           FailedSending
//! Confirmation      (v_b - c,   c - v_s)     (-c,   c + v_s)
//! NoConfirmation    (v_b - d_b, -d_s - v_s)  (-d_b, -d_s + v_s)
//! ```
//!
//! With the proof gate in place the buyer can only confirm after a correct
//! delivery, which turns the game into a sequential one solved by backward
//! induction in [`revised_nash`].

use std::fmt;

use serde::{Deserialize, Serialize};

/// Payoffs are signed and wide enough for any pair of `u64` parameters.
pub type Payoff = i128;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GameParams {
    /// Price `c`.
    #[serde(alias = "c")]
    pub price: u64,
    /// Seller deposit `d_s`.
    #[serde(alias = "ds")]
    pub deposit_seller: u64,
    /// Buyer deposit `d_b`.
    #[serde(alias = "db")]
    pub deposit_buyer: u64,
    /// Value of the data to the seller, `v_s`.
    #[serde(alias = "vs")]
    pub value_seller: u64,
    /// Value of the data to the buyer, `v_b`.
    #[serde(alias = "vb")]
    pub value_buyer: u64,
}

impl GameParams {
    pub fn new(price: u64, deposit_seller: u64, deposit_buyer: u64, value_seller: u64, value_buyer: u64) -> Self {
        Self {
            price,
            deposit_seller,
            deposit_buyer,
            value_seller,
            value_buyer,
        }
    }

    /// Both deposits strictly exceed the price.
    pub fn deposits_exceed_price(&self) -> bool {
        self.deposit_seller > self.price && self.deposit_buyer > self.price
    }

    fn signed(&self) -> [Payoff; 5] {
        [
            self.price as Payoff,
            self.deposit_seller as Payoff,
            self.deposit_buyer as Payoff,
            self.value_seller as Payoff,
            self.value_buyer as Payoff,
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SellerAction {
    CorrectSending,
    FailedSending,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum BuyerAction {
    Confirmation,
    NoConfirmation,
}

impl SellerAction {
    pub const ALL: [SellerAction; 2] = [SellerAction::CorrectSending, SellerAction::FailedSending];

    pub fn other(self) -> Self {
        match self {
            SellerAction::CorrectSending => SellerAction::FailedSending,
            SellerAction::FailedSending => SellerAction::CorrectSending,
        }
    }

    fn index(self) -> usize {
        self as usize
    }
}

impl BuyerAction {
    pub const ALL: [BuyerAction; 2] = [BuyerAction::Confirmation, BuyerAction::NoConfirmation];

    pub fn other(self) -> Self {
        match self {
            BuyerAction::Confirmation => BuyerAction::NoConfirmation,
            BuyerAction::NoConfirmation => BuyerAction::Confirmation,
        }
    }

    fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for SellerAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

impl fmt::Display for BuyerAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ActionProfile {
    pub buyer: BuyerAction,
    pub seller: SellerAction,
}

impl ActionProfile {
    pub fn new(buyer: BuyerAction, seller: SellerAction) -> Self {
        Self { buyer, seller }
    }

    /// All four profiles, row-major in table order.
    pub fn all() -> impl Iterator<Item = ActionProfile> {
        BuyerAction::ALL
            .into_iter()
            .flat_map(|b| SellerAction::ALL.into_iter().map(move |s| ActionProfile::new(b, s)))
    }

    /// `(seller, buyer)`, the order of moves in the sequential game.
    pub fn move_order(&self) -> String {
        format!("({}, {})", self.seller, self.buyer)
    }
}

impl fmt::Display for ActionProfile {
    /// `(buyer, seller)`, matching the table layout.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.buyer, self.seller)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Cell {
    pub buyer: Payoff,
    pub seller: Payoff,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct PayoffMatrix {
    /// `cells[buyer][seller]`.
    cells: [[Cell; 2]; 2],
}

impl PayoffMatrix {
    pub fn from_cells(cells: [[Cell; 2]; 2]) -> Self {
        Self { cells }
    }

    pub fn cell(&self, profile: ActionProfile) -> Cell {
        self.cells[profile.buyer.index()][profile.seller.index()]
    }

    /// Buyer's best replies to a fixed seller action; ties return both.
    pub fn buyer_best_responses(&self, seller: SellerAction) -> Vec<BuyerAction> {
        let best = BuyerAction::ALL
            .iter()
            .map(|&b| self.cell(ActionProfile::new(b, seller)).buyer)
            .max()
            .expect("two actions");
        BuyerAction::ALL
            .into_iter()
            .filter(|&b| self.cell(ActionProfile::new(b, seller)).buyer == best)
            .collect()
    }

    /// Seller's best replies to a fixed buyer action; ties return both.
    pub fn seller_best_responses(&self, buyer: BuyerAction) -> Vec<SellerAction> {
        let best = SellerAction::ALL
            .iter()
            .map(|&s| self.cell(ActionProfile::new(buyer, s)).seller)
            .max()
            .expect("two actions");
        SellerAction::ALL
            .into_iter()
            .filter(|&s| self.cell(ActionProfile::new(buyer, s)).seller == best)
            .collect()
    }
}

pub fn build_matrix(p: &GameParams) -> PayoffMatrix {
    let [c, ds, db, vs, vb] = p.signed();
    PayoffMatrix::from_cells([
        [
            Cell { buyer: vb - c, seller: c - vs },
            Cell { buyer: -c, seller: c + vs },
        ],
        [
            Cell { buyer: vb - db, seller: -ds - vs },
            Cell { buyer: -db, seller: -ds + vs },
        ],
    ])
}

/// A pure profile from which no player gains by deviating alone.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Equilibrium {
    pub profile: ActionProfile,
    /// Buyer would get the same payoff by switching.
    pub buyer_indifferent: bool,
    /// Seller would get the same payoff by switching.
    pub seller_indifferent: bool,
}

impl Equilibrium {
    pub fn is_strict(&self) -> bool {
        !self.buyer_indifferent && !self.seller_indifferent
    }
}

/// All weak pure-strategy Nash equilibria, in table order.
pub fn pure_nash(m: &PayoffMatrix) -> Vec<Equilibrium> {
    ActionProfile::all()
        .filter_map(|profile| {
            let here = m.cell(profile);
            let buyer_dev = m.cell(ActionProfile::new(profile.buyer.other(), profile.seller)).buyer;
            let seller_dev = m.cell(ActionProfile::new(profile.buyer, profile.seller.other())).seller;
            (here.buyer >= buyer_dev && here.seller >= seller_dev).then_some(Equilibrium {
                profile,
                buyer_indifferent: here.buyer == buyer_dev,
                seller_indifferent: here.seller == seller_dev,
            })
        })
        .collect()
}

/// Result of the proof-gated sequential game.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum RevisedOutcome {
    /// Unique subgame-perfect outcome reached without any tie.
    Determined(ActionProfile),
    /// Some player is indifferent; every subgame-perfect outcome is listed.
    Indifferent(Vec<ActionProfile>),
}

impl RevisedOutcome {
    pub fn determined(&self) -> Option<ActionProfile> {
        match self {
            RevisedOutcome::Determined(p) => Some(*p),
            RevisedOutcome::Indifferent(_) => None,
        }
    }
}

/// Backward induction on: seller delivers or not, then the buyer picks from
/// the actions still feasible. Confirmation needs a verifying proof, which
/// exists only after a correct delivery.
pub fn revised_nash(p: &GameParams) -> RevisedOutcome {
    let m = build_matrix(p);
    let after_failed = ActionProfile::new(BuyerAction::NoConfirmation, SellerAction::FailedSending);
    let after_correct = m.buyer_best_responses(SellerAction::CorrectSending);
    let mut tie = after_correct.len() > 1;
    let mut outcomes = Vec::new();
    for buyer in after_correct {
        let delivered = ActionProfile::new(buyer, SellerAction::CorrectSending);
        let (u_deliver, u_fail) = (m.cell(delivered).seller, m.cell(after_failed).seller);
        if u_deliver >= u_fail {
            outcomes.push(delivered);
        }
        if u_fail >= u_deliver {
            outcomes.push(after_failed);
        }
        tie |= u_deliver == u_fail;
    }
    outcomes.sort();
    outcomes.dedup();
    if !tie && outcomes.len() == 1 {
        RevisedOutcome::Determined(outcomes[0])
    } else {
        RevisedOutcome::Indifferent(outcomes)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FairnessReport {
    /// `d_s > c`
    pub seller_deposit_exceeds_price: bool,
    /// `d_b > c`
    pub buyer_deposit_exceeds_price: bool,
    /// `d_s > 2 v_s - c`: delivering beats withholding once proofs gate confirmation.
    pub delivery_beats_withholding: bool,
    pub equilibria: Vec<Equilibrium>,
    pub revised: RevisedOutcome,
    /// All conditions hold and the gated game settles on honest delivery.
    pub fair: bool,
}

pub fn fairness_condition(p: &GameParams) -> FairnessReport {
    let [c, ds, _, vs, _] = p.signed();
    let seller_ok = p.deposit_seller > p.price;
    let buyer_ok = p.deposit_buyer > p.price;
    let delivery = ds > 2 * vs - c;
    let revised = revised_nash(p);
    let honest = ActionProfile::new(BuyerAction::Confirmation, SellerAction::CorrectSending);
    FairnessReport {
        seller_deposit_exceeds_price: seller_ok,
        buyer_deposit_exceeds_price: buyer_ok,
        delivery_beats_withholding: delivery,
        equilibria: pure_nash(&build_matrix(p)),
        fair: seller_ok && buyer_ok && delivery && revised.determined() == Some(honest),
        revised,
    }
}

/// Everything the `analyze` command reports.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub params: GameParams,
    pub matrix: Vec<MatrixEntry>,
    pub fairness: FairnessReport,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatrixEntry {
    pub profile: ActionProfile,
    pub payoff: Cell,
}

pub fn analyze(p: &GameParams) -> AnalysisReport {
    let m = build_matrix(p);
    AnalysisReport {
        params: *p,
        matrix: ActionProfile::all()
            .map(|profile| MatrixEntry {
                profile,
                payoff: m.cell(profile),
            })
            .collect(),
        fairness: fairness_condition(p),
    }
}

impl AnalysisReport {
    pub fn render_text(&self) -> String {
        let p = &self.params;
        let f = &self.fairness;
        let mut out = format!(
            "params: c={} d_s={} d_b={} v_s={} v_b={}\n\n",
            p.price, p.deposit_seller, p.deposit_buyer, p.value_seller, p.value_buyer
        );
        let cell = |b, s| {
            let e = self
                .matrix
                .iter()
                .find(|e| e.profile == ActionProfile::new(b, s))
                .expect("all four cells present");
            format!("({}, {})", e.payoff.buyer, e.payoff.seller)
        };
        out.push_str(&format!(
            "{:<18}{:<20}{:<20}\n",
            "Buyer \\ Seller", "CorrectSending", "FailedSending"
        ));
        for b in BuyerAction::ALL {
            out.push_str(&format!(
                "{:<18}{:<20}{:<20}\n",
                b.to_string(),
                cell(b, SellerAction::CorrectSending),
                cell(b, SellerAction::FailedSending)
            ));
        }
        out.push_str("cells are (buyer payoff, seller payoff)\n\n");
        let nash: Vec<String> = f
            .equilibria
            .iter()
            .map(|e| {
                if e.is_strict() {
                    e.profile.to_string()
                } else {
                    format!("{} [weak]", e.profile)
                }
            })
            .collect();
        out.push_str(&format!("Nash: {}\n", if nash.is_empty() { "none".into() } else { nash.join(", ") }));
        let revised = match &f.revised {
            RevisedOutcome::Determined(p) => p.move_order(),
            RevisedOutcome::Indifferent(ps) => format!(
                "indifferent between {}",
                ps.iter().map(|p| p.move_order()).collect::<Vec<_>>().join(" and ")
            ),
        };
        out.push_str(&format!("revised: {revised}\n"));
        let flag = |ok: bool| if ok { "holds" } else { "VIOLATED" };
        out.push_str(&format!("condition d_s > c: {}\n", flag(f.seller_deposit_exceeds_price)));
        out.push_str(&format!("condition d_b > c: {}\n", flag(f.buyer_deposit_exceeds_price)));
        out.push_str(&format!("condition d_s > 2 v_s - c: {}\n", flag(f.delivery_beats_withholding)));
        out.push_str(&format!("fair: {}\n", f.fair));
        out
    }
}
