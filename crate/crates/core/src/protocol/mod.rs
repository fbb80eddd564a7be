//! Client/server SPIR machinery.
//!
//! The server's `N2` databases each hold `X_2` and a shared list of
//! randomness symbols. The client talks to them through a
//! [`RoundScheduler`], which turns every request for a linear function
//! `vᵀX_2` into masked queries and decodes the answer difference. CarPSI,
//! FindPSI, the sequential optimizer, threshold PSI and the naive baseline
//! are all built on that single primitive, so their download costs follow
//! from the number of payloads they request.

mod primitives;
mod scheduler;
mod schemes;
mod server;
mod view;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub use primitives::{carpsi, find_members, findpsi, group_cardinality};
pub use scheduler::{Message, Phase, Round, RoundScheduler, Transcript};
pub use schemes::{
    client_rng, naive_psi, optimize, optimize_with, server_state, thpsi, NaiveOutcome, OptimizeOutcome, ThPsiOutcome,
};
pub use server::{database_answer, randomness_supply, CommonRandomness, Database, ServerState};
pub use view::{client_knowledge, decode_transcript, probed_indices, revealed_values, ClientKnowledge, DecodedPayload};

/// Stream label for the client's query masks.
pub const CLIENT_STREAM: u64 = 1;
/// Stream label for the server's common randomness.
pub const SERVER_STREAM: u64 = 2;

/// Independent ChaCha stream `stream` under `seed`.
pub fn seeded_stream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeSet;

    use super::*;
    use crate::error::Error;
    use crate::field::{FieldVector, Prime};
    use crate::fixtures;
    use crate::model::{brute_force_optimum, rank_partition, Entity, FeasibleSet, Objective, Scenario, Sense};

    fn set(indices: &[usize]) -> BTreeSet<usize> {
        indices.iter().copied().collect()
    }

    fn with_n2(s: Scenario, n2: usize) -> Scenario {
        s.with_n2(n2).unwrap()
    }

    #[test]
    fn base_movie_scenario_costs() {
        for (n2, total, find) in [(2, 6, 4), (3, 5, 3), (4, 4, 2)] {
            let out = optimize(&with_n2(fixtures::movies(), n2)).unwrap();
            assert_eq!(out.pstar, set(&[2, 6]));
            assert_eq!(out.transcript.total_download(), total, "N2 = {n2}");
            let phases = out.transcript.phase_downloads();
            assert_eq!(phases[&Phase::CarPsi], 2);
            assert_eq!(phases[&Phase::FindPsi], find);
            assert_eq!((out.rank, out.alpha, out.multiplicity), (1, 3, 2));
            assert!(!out.skipped);
        }
    }

    #[test]
    fn findpsi_queries_follow_the_round_layout() {
        // N2 = 3: e_A rides on round 1's third database, then round 2 opens
        // for e_C. G is held out.
        let out = optimize(&with_n2(fixtures::movies(), 3)).unwrap();
        let msgs = out.transcript.messages();
        let layout: Vec<(Phase, usize, usize)> = msgs.iter().map(|m| (m.phase, m.round, m.db)).collect();
        assert_eq!(
            layout,
            [
                (Phase::CarPsi, 1, 1),
                (Phase::CarPsi, 1, 2),
                (Phase::FindPsi, 1, 3),
                (Phase::FindPsi, 2, 1),
                (Phase::FindPsi, 2, 2),
            ]
        );
        let q = Prime::new(5).unwrap();
        let h1 = &out.rounds[0].mask;
        let h2 = &out.rounds[1].mask;
        assert_eq!(msgs[0].query, h1.residues());
        assert_eq!(msgs[2].query, h1.add(&FieldVector::basis(q, 8, 0).unwrap()).unwrap().residues());
        assert_eq!(msgs[3].query, h2.residues());
        assert_eq!(msgs[4].query, h2.add(&FieldVector::basis(q, 8, 2).unwrap()).unwrap().residues());
    }

    #[test]
    fn other_movie_mappings() {
        let third = optimize(&fixtures::movies_map3()).unwrap();
        assert_eq!(third.pstar, set(&[6]));
        assert_eq!(third.transcript.total_download(), 2);

        let second = optimize(&fixtures::movies_map2()).unwrap();
        assert_eq!(second.pstar, set(&[2, 3, 6]));
        assert_eq!(second.transcript.total_download(), 4);
        assert_eq!(second.cardinalities, [0, 3]);
        for n2 in 3..=6 {
            let out = optimize(&with_n2(fixtures::movies_map2(), n2)).unwrap();
            assert_eq!(out.transcript.total_download(), 3, "N2 = {n2}");
        }
    }

    fn movie_sched_parts(s: &Scenario) -> (ServerState, rand_chacha::ChaCha8Rng) {
        (server_state(s).unwrap(), client_rng(s))
    }

    #[test]
    fn carpsi_examples() {
        let s = fixtures::movies();
        let rp = rank_partition(s.set1(), s.objective()).unwrap();
        let (server, rng) = movie_sched_parts(&s);
        let mut sched = RoundScheduler::new(&server, rng, true);
        assert_eq!(carpsi(&mut sched, &rp, 1).unwrap(), 2);
        assert_eq!(carpsi(&mut sched, &rp, 2).unwrap(), 1);
        assert!(matches!(carpsi(&mut sched, &rp, 3), Err(Error::RankOutOfRange { .. })));

        // A group disjoint from P2: {A} under the second mapping.
        let s2 = fixtures::movies_map2();
        let rp2 = rank_partition(s2.set1(), s2.objective()).unwrap();
        let (server, rng) = movie_sched_parts(&s2);
        let mut sched = RoundScheduler::new(&server, rng, true);
        assert_eq!(carpsi(&mut sched, &rp2, 1).unwrap(), 0);
        assert_eq!(carpsi(&mut sched, &rp2, 2).unwrap(), 3);
    }

    #[test]
    fn findpsi_examples_and_errors() {
        let s = fixtures::movies();
        let rp = rank_partition(s.set1(), s.objective()).unwrap();
        let (server, rng) = movie_sched_parts(&s);
        let mut sched = RoundScheduler::new(&server, rng, true);
        assert_eq!(findpsi(&mut sched, &rp, 1, 2).unwrap(), set(&[2, 6]));
        // Only C probes as present besides the held-out G, so G is inferred.
        assert!(findpsi(&mut sched, &rp, 1, 0).is_err());
        assert!(findpsi(&mut sched, &rp, 1, 3).is_err());
        assert!(findpsi(&mut sched, &rp, 2, 1).is_err());

        // {A, C, D, G} with m = 3 = alpha - 1: held-out G forced to 1.
        let (server, rng) = movie_sched_parts(&s);
        let mut sched = RoundScheduler::new(&server, rng, true);
        assert_eq!(find_members(&mut sched, &[0, 2, 3, 6], 3, Phase::ThPsiFind).unwrap(), set(&[2, 3, 6]));
        // Wrong cardinality hint is detected through the held-out bit.
        let (server, rng) = movie_sched_parts(&s);
        let mut sched = RoundScheduler::new(&server, rng, true);
        assert!(matches!(
            find_members(&mut sched, &[0, 2, 3, 6], 1, Phase::ThPsiFind),
            Err(Error::CorruptBit { index: 6, .. })
        ));
    }

    #[test]
    fn non_binary_server_vector_is_flagged() {
        let q = Prime::new(5).unwrap();
        let x2 = FieldVector::from_residues(q, [2, 1, 0]);
        let randomness = CommonRandomness::sample(&mut seeded_stream(0, SERVER_STREAM), q, 4);
        let server = ServerState::new(x2, randomness, 2);
        let mut sched = RoundScheduler::new(&server, seeded_stream(0, CLIENT_STREAM), true);
        assert_eq!(
            find_members(&mut sched, &[0, 1, 2], 1, Phase::FindPsi),
            Err(Error::CorruptBit { index: 0, value: 2 })
        );
    }

    #[test]
    fn skip_rule_accepts_last_singleton_without_query() {
        // P1 = {x1, x2, x3}, only x3 shared, all values distinct, x3 worst.
        let alphabet = crate::model::Alphabet::numbered(4).unwrap();
        let s = Scenario::new(
            alphabet,
            FeasibleSet::new(Entity::E1, [0, 1, 2], 4).unwrap(),
            FeasibleSet::new(Entity::E2, [2, 3], 4).unwrap(),
            Objective::new(vec![1, 2, 3, 4], Sense::Minimize),
            2,
            None,
            7,
        )
        .unwrap();
        let out = optimize(&s).unwrap();
        assert!(out.skipped);
        assert_eq!(out.pstar, set(&[2]));
        assert_eq!(out.cardinalities, [0, 0]);
        assert_eq!(out.transcript.total_download(), 4);
        assert_eq!((out.rank, out.alpha, out.multiplicity), (3, 1, 1));

        // Single-element client set: no query at all.
        let s1 = Scenario::new(
            crate::model::Alphabet::numbered(2).unwrap(),
            FeasibleSet::new(Entity::E1, [1], 2).unwrap(),
            FeasibleSet::new(Entity::E2, [0, 1], 2).unwrap(),
            Objective::new(vec![1, 1], Sense::Minimize),
            3,
            None,
            0,
        )
        .unwrap();
        let out = optimize(&s1).unwrap();
        assert_eq!(out.transcript.total_download(), 0);
        assert_eq!(out.pstar, set(&[1]));
    }

    #[test]
    fn empty_intersection_is_a_model_violation() {
        let s = Scenario::new_relaxed(
            crate::model::Alphabet::numbered(4).unwrap(),
            FeasibleSet::new(Entity::E1, [0, 1], 4).unwrap(),
            FeasibleSet::new(Entity::E2, [2, 3], 4).unwrap(),
            Objective::new(vec![1, 1, 2, 2], Sense::Minimize),
            2,
            None,
            0,
        )
        .unwrap();
        assert_eq!(optimize(&s).unwrap_err(), Error::EmptyIntersection);
        assert_eq!(naive_psi(&s).unwrap_err(), Error::EmptyIntersection);
    }

    #[test]
    fn thpsi_examples() {
        let s = fixtures::movies();
        let high = thpsi(&s, 5).unwrap();
        assert_eq!((high.cardinality, high.intersection.clone()), (3, None));
        assert_eq!(high.transcript.total_download(), 2);

        for n2 in 2..=5 {
            let low = thpsi(&with_n2(fixtures::movies(), n2), 2).unwrap();
            assert_eq!(low.cardinality, 3);
            assert_eq!(low.intersection, Some(set(&[2, 3, 6])));
            assert_eq!(low.transcript.total_download(), (4 * n2).div_ceil(n2 - 1));
        }

        // P1 ⊆ P2 with t = 1.
        let subset = Scenario::new(
            crate::model::Alphabet::numbered(4).unwrap(),
            FeasibleSet::new(Entity::E1, [0, 1], 4).unwrap(),
            FeasibleSet::new(Entity::E2, [0, 1, 2], 4).unwrap(),
            Objective::new(vec![1; 4], Sense::Minimize),
            3,
            None,
            0,
        )
        .unwrap();
        let full = thpsi(&subset, 1).unwrap();
        assert_eq!(full.intersection, Some(set(&[0, 1])));
        assert_eq!(full.transcript.total_download(), 2);
        assert_eq!(thpsi(&subset, 0).unwrap_err(), Error::InvalidThreshold);
    }

    #[test]
    fn naive_baseline() {
        for (n2, d) in [(2, 8), (3, 6), (5, 5)] {
            let s = with_n2(fixtures::movies(), n2);
            let out = naive_psi(&s).unwrap();
            assert_eq!(out.intersection, set(&[2, 3, 6]));
            assert_eq!(out.transcript.total_download(), d);
            assert_eq!(out.pstar, optimize(&s).unwrap().pstar);
            assert_eq!(out.pstar, brute_force_optimum(&s).unwrap());
        }
    }

    #[test]
    fn client_knowledge_matches_visited_groups() {
        for (_, s) in fixtures::all() {
            let out = optimize(&s).unwrap();
            let k = client_knowledge(&out.transcript, &out.partition, s.prime()).unwrap();
            assert_eq!(k.rank, out.rank);
            let visited = out.partition.union_through(out.rank);
            assert_eq!(k.bits.keys().copied().collect::<BTreeSet<_>>(), visited);
            for (j, bit) in k.bits {
                assert_eq!(bit, s.set2().contains(j));
            }
        }
    }

    #[test]
    fn decoding_requires_recorded_queries() {
        let s = fixtures::movies();
        let out = optimize_with(&s, false).unwrap();
        assert_eq!(out.transcript.total_download(), 6);
        assert!(decode_transcript(&out.transcript, s.prime()).is_err());
    }

    #[test]
    fn decoded_values_are_cardinalities_and_probe_bits() {
        let s = fixtures::movies();
        let out = optimize(&s).unwrap();
        let decoded = decode_transcript(&out.transcript, s.prime()).unwrap();
        let (cards, probes) = revealed_values(&decoded);
        assert_eq!(cards, [2]);
        assert_eq!(probes, [(0, 0), (2, 1)].into_iter().collect());
        assert_eq!(probed_indices(&decoded), set(&[0, 2]));
    }
}
