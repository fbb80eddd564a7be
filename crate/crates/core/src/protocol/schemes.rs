use std::collections::BTreeSet;

use rand_chacha::ChaCha8Rng;

use super::primitives::{carpsi, find_members, findpsi, group_cardinality};
use super::scheduler::{Phase, Round, RoundScheduler, Transcript};
use super::server::{CommonRandomness, ServerState};
use super::{seeded_stream, CLIENT_STREAM, SERVER_STREAM};
use crate::error::{Error, Result};
use crate::field::FieldVector;
use crate::model::{incidence_vector, optimum_over, rank_partition, RankPartition, Scenario};

/// Server state for a scenario. The common randomness comes from its own
/// stream of the scenario seed, independent of the sets and the objective.
pub fn server_state(s: &Scenario) -> Result<ServerState> {
    let x2 = incidence_vector(s.set2(), s.alphabet())?.to_field(s.prime());
    let mut rng = seeded_stream(s.seed(), SERVER_STREAM);
    let randomness = CommonRandomness::for_sets(&mut rng, s.prime(), s.set1().len(), s.n2());
    Ok(ServerState::new(x2, randomness, s.n2()))
}

/// Client mask stream for a scenario.
pub fn client_rng(s: &Scenario) -> ChaCha8Rng {
    seeded_stream(s.seed(), CLIENT_STREAM)
}

#[derive(Debug, Clone)]
pub struct OptimizeOutcome {
    pub pstar: BTreeSet<usize>,
    pub transcript: Transcript,
    pub rounds: Vec<Round>,
    pub partition: RankPartition,
    /// `R`: rank of the optimal value among the client's groups.
    pub rank: usize,
    /// `α_R`.
    pub alpha: usize,
    /// `M_R`; inferred as 1 when the last singleton group is skipped.
    pub multiplicity: usize,
    /// Decoded `M_1, M_2, ...` in query order.
    pub cardinalities: Vec<u64>,
    /// The last group was a singleton reached with all prior `M_r = 0`, so
    /// it was accepted without a query.
    pub skipped: bool,
}

pub fn optimize(s: &Scenario) -> Result<OptimizeOutcome> {
    optimize_with(s, true)
}

/// Sequential search for `P*`: CarPSI down the ranks until a group meets
/// `P_2`, then FindPSI on that group if it is only partially shared.
pub fn optimize_with(s: &Scenario, record_queries: bool) -> Result<OptimizeOutcome> {
    let rp = rank_partition(s.set1(), s.objective())?;
    let server = server_state(s)?;
    let mut sched = RoundScheduler::new(&server, client_rng(s), record_queries);
    let levels = rp.levels();
    let mut cardinalities = Vec::new();

    for r in 1..=levels {
        let alpha = rp.alpha(r)?;
        let group: BTreeSet<usize> = rp.group(r)?.iter().copied().collect();
        if r == levels && alpha == 1 {
            let (transcript, rounds) = sched.finish();
            return Ok(OptimizeOutcome {
                pstar: group,
                transcript,
                rounds,
                partition: rp,
                rank: r,
                alpha,
                multiplicity: 1,
                cardinalities,
                skipped: true,
            });
        }
        let m = carpsi(&mut sched, &rp, r)?;
        cardinalities.push(m);
        if m == 0 {
            continue;
        }
        let pstar = if (m as usize) < alpha { findpsi(&mut sched, &rp, r, m)? } else { group };
        let (transcript, rounds) = sched.finish();
        return Ok(OptimizeOutcome {
            pstar,
            transcript,
            rounds,
            partition: rp,
            rank: r,
            alpha,
            multiplicity: m as usize,
            cardinalities,
            skipped: false,
        });
    }
    Err(Error::EmptyIntersection)
}

#[derive(Debug, Clone)]
pub struct ThPsiOutcome {
    /// `M = |P_1 ∩ P_2|`.
    pub cardinality: usize,
    /// The intersection, released only when `M ≥ t`.
    pub intersection: Option<BTreeSet<usize>>,
    pub transcript: Transcript,
    pub rounds: Vec<Round>,
}

/// Threshold PSI: learn `|P_1 ∩ P_2|`, and the intersection itself only if
/// its size reaches `t`.
pub fn thpsi(s: &Scenario, t: usize) -> Result<ThPsiOutcome> {
    if t == 0 {
        return Err(Error::InvalidThreshold);
    }
    let server = server_state(s)?;
    let mut sched = RoundScheduler::new(&server, client_rng(s), true);
    let group: Vec<usize> = s.set1().indices().iter().copied().collect();
    let m = group_cardinality(&mut sched, &group, Phase::ThPsiCar)? as usize;
    let intersection = if m < t {
        None
    } else if m == group.len() {
        Some(s.set1().indices().clone())
    } else {
        Some(find_members(&mut sched, &group, m as u64, Phase::ThPsiFind)?)
    };
    let (transcript, rounds) = sched.finish();
    Ok(ThPsiOutcome { cardinality: m, intersection, transcript, rounds })
}

#[derive(Debug, Clone)]
pub struct NaiveOutcome {
    pub intersection: BTreeSet<usize>,
    pub pstar: BTreeSet<usize>,
    pub transcript: Transcript,
    pub rounds: Vec<Round>,
}

/// Baseline: probe `X_2(j)` for every `j ∈ I_1`, then optimize locally over
/// the recovered intersection.
pub fn naive_psi(s: &Scenario) -> Result<NaiveOutcome> {
    let server = server_state(s)?;
    let mut sched = RoundScheduler::new(&server, client_rng(s), true);
    let (q, k) = (s.prime(), s.k());
    let mut intersection = BTreeSet::new();
    for &j in s.set1().indices() {
        match sched.request_payload(Phase::Psi, &FieldVector::basis(q, k, j)?)?.value() {
            0 => {}
            1 => {
                intersection.insert(j);
            }
            value => return Err(Error::CorruptBit { index: j, value }),
        }
    }
    let pstar = optimum_over(&intersection, s.objective())?;
    let (transcript, rounds) = sched.finish();
    Ok(NaiveOutcome { intersection, pstar, transcript, rounds })
}
