//! Random operation sequences against the escrow contract.

use idex_core::algebra::{seeded_rng, GroupParams};
use idex_core::cas_store::Digest;
use idex_core::exchange_contract::{ExchangeContract, ExchangeParams, Phase, ProofVerdict};
use idex_core::ledger::{Address, Ledger};
use idex_core::pre::{keygen, rekeygen};
use idex_core::zkpok::{commit, prove, Basis, Opening};
use proptest::prelude::*;

#[derive(Debug, Clone)]
enum Op {
    Deposit { who: u8, amount: u64 },
    Rekey { who: u8 },
    Proof { who: u8, honest: bool },
    Advance(u64),
    Timeout,
}

fn op() -> impl Strategy<Value = Op> {
    prop_oneof![
        (0u8..3, prop_oneof![Just(15u64), Just(25), 0u64..40]).prop_map(|(who, amount)| Op::Deposit { who, amount }),
        (0u8..3).prop_map(|who| Op::Rekey { who }),
        (0u8..3, any::<bool>()).prop_map(|(who, honest)| Op::Proof { who, honest }),
        (1u64..6).prop_map(Op::Advance),
        Just(Op::Timeout),
    ]
}

fn rank(p: Phase) -> u8 {
    match p {
        Phase::AwaitingDeposits => 0,
        Phase::AwaitingKey => 1,
        Phase::AwaitingProof => 2,
        Phase::Settled | Phase::Forfeited => 3,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn contract_invariants_hold(ops in proptest::collection::vec(op(), 0..40), seed: u64) {
        let group = GroupParams::setup(1_000_000_007).unwrap();
        let mut rng = seeded_rng(seed);
        let parties = [Address::new("seller"), Address::new("buyer"), Address::new("mallory")];
        let mut ledger = Ledger::genesis(parties.iter().map(|a| (a.clone(), 100))).unwrap();
        let opening = Opening { k: group.random_exponent(&mut rng), s: group.random_exponent(&mut rng) };
        let commitment = commit(&opening.k, &opening.s, &Basis::standard(&group)).unwrap();
        let mut contract = ExchangeContract::deploy(&mut ledger, Address::new("escrow"), ExchangeParams {
            seller: parties[0].clone(),
            buyer: parties[1].clone(),
            price: 10,
            deposit_seller: 15,
            deposit_buyer: 15,
            commitment,
            ciphertext_digest: Digest::of(b"blob"),
            nonce: 7,
            timeout_deposit: 8,
            timeout_key: 16,
            timeout_proof: 24,
        }).unwrap();
        let a = keygen(&group, &mut rng);
        let b = keygen(&group, &mut rng);
        let rk = rekeygen(&a.sk, &b.pk).unwrap();
        let ctx = contract.proof_context();

        for op in ops {
            let before = contract.phase();
            let state_before = contract.state().clone();
            let mut accepted_proof = false;
            match op {
                Op::Deposit { who, amount } => { let _ = contract.deposit(&mut ledger, &parties[who as usize], amount); }
                Op::Rekey { who } => { let _ = contract.submit_rekey(&ledger, &parties[who as usize], rk); }
                Op::Proof { who, honest } => {
                    let mut proof = prove(&opening, &contract.params().commitment, &ctx, &mut rng).unwrap();
                    if !honest {
                        proof.z1 = proof.z1.add(&group.scalar(1)).unwrap();
                    }
                    let verdict = contract.submit_proof(&mut ledger, &parties[who as usize], &proof);
                    accepted_proof = matches!(verdict, Ok(ProofVerdict::Accepted));
                    if matches!(verdict, Ok(ProofVerdict::Rejected)) {
                        prop_assert_eq!(contract.state(), &state_before);
                    }
                }
                Op::Advance(n) => { ledger.advance_height(n).unwrap(); }
                Op::Timeout => { let _ = contract.on_timeout(&mut ledger, &parties[2]); }
            }
            let after = contract.phase();
            // money never leaves the system and escrow matches the contract account
            prop_assert_eq!(ledger.circulating(), 300);
            prop_assert_eq!(ledger.balance(contract.address()).unwrap(), contract.state().escrow);
            // no back edges, terminals absorb
            prop_assert!(rank(after) >= rank(before));
            if before.is_terminal() {
                prop_assert_eq!(contract.state(), &state_before);
            }
            if after == Phase::Settled && before != Phase::Settled {
                prop_assert!(accepted_proof);
            }
            if after.is_terminal() {
                prop_assert_eq!(contract.state().escrow, 0);
            }
            // the third party never loses or gains anything
            prop_assert_eq!(ledger.balance(&parties[2]).unwrap(), 100);
        }
    }
}
