//! Replay equivalence: ledger state must equal a brute-force recount of the
//! raw event log, for any valid sequence of requests and outcomes.

mod common;

use common::{recount_ops, LedgerOp};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use std::collections::BTreeMap;

use peertrust_core::score::Classification;
use peertrust_core::{NodeId, OpinionTable};

const PEERS: [&str; 4] = ["p1", "p2", "p3", "p4"];

fn random_sequence(seed: u64, max_len: usize) -> Vec<LedgerOp> {
    let mut rng = StdRng::seed_from_u64(seed);
    let mut pending: BTreeMap<&str, u32> = BTreeMap::new();
    let mut at = 0.0_f64;
    let len = rng.gen_range(1..=max_len);
    let mut ops = Vec::with_capacity(len);
    for _ in 0..len {
        at += rng.gen_range(0.0..10.0);
        let peer = PEERS[rng.gen_range(0..PEERS.len())];
        let slot = pending.entry(peer).or_insert(0);
        if *slot > 0 && rng.gen_bool(0.5) {
            *slot -= 1;
            let class = if rng.gen_bool(0.5) {
                Classification::Positive
            } else {
                Classification::Negative
            };
            ops.push(LedgerOp::Outcome { peer: peer.to_owned(), class, at });
        } else {
            *slot += 1;
            ops.push(LedgerOp::Request { peer: peer.to_owned(), at });
        }
    }
    ops
}

fn apply(ops: &[LedgerOp]) -> OpinionTable {
    let mut table = OpinionTable::new(NodeId::new("owner").unwrap());
    for op in ops {
        match op {
            LedgerOp::Request { peer, at } => {
                table.record_request(&NodeId::new(peer.clone()).unwrap(), *at).unwrap();
            }
            LedgerOp::Outcome { peer, class, at } => {
                table
                    .record_outcome(&NodeId::new(peer.clone()).unwrap(), *class, *at)
                    .unwrap();
            }
        }

        // Bounds must hold after every single update.
        for (_, entry) in table.entries() {
            let op_value = entry.personal_opinion();
            let weight = entry.node_weight();
            assert!((-1.0..=1.0).contains(&op_value), "opinion {op_value} out of range");
            assert!((0.0..=1.0).contains(&weight), "weight {weight} out of range");
        }
    }
    table
}

#[test]
fn ledger_matches_brute_force_recount() {
    for seed in 0..200 {
        let ops = random_sequence(seed, 200);
        let table = apply(&ops);
        let recounted = recount_ops(&ops);

        assert_eq!(table.entries().count(), recounted.len(), "seed {seed}");
        for (peer, expected) in &recounted {
            let entry = table
                .entry(&NodeId::new(peer.clone()).unwrap())
                .unwrap_or_else(|| panic!("seed {seed}: missing entry for {peer}"));
            assert_eq!(entry.positive(), expected.positive, "seed {seed} peer {peer}");
            assert_eq!(entry.negative(), expected.negative, "seed {seed} peer {peer}");
            assert_eq!(entry.total(), expected.total, "seed {seed} peer {peer}");
            assert_eq!(entry.personal_opinion(), expected.opinion(), "seed {seed} peer {peer}");
            assert_eq!(entry.node_weight(), expected.weight(), "seed {seed} peer {peer}");
            assert_eq!(entry.first_contact_time(), expected.first, "seed {seed} peer {peer}");
            assert_eq!(entry.last_interaction_time(), expected.last, "seed {seed} peer {peer}");
        }
    }
}

#[test]
fn pending_requests_only_dilute() {
    // A request with no outcome never raises a positive opinion.
    let mut table = OpinionTable::new(NodeId::new("owner").unwrap());
    let peer = NodeId::new("p").unwrap();
    table.record_request(&peer, 0.0).unwrap();
    table.record_outcome(&peer, Classification::Positive, 1.0).unwrap();
    let mut previous = table.entry(&peer).unwrap().personal_opinion();
    for k in 0..20 {
        table.record_request(&peer, 2.0 + k as f64).unwrap();
        let now = table.entry(&peer).unwrap().personal_opinion();
        assert!(now < previous, "opinion must strictly drop while positive");
        previous = now;
    }
}
