//! CarPSI and FindPSI on top of the round scheduler.

use std::collections::BTreeSet;

use rand::Rng;

use super::scheduler::{Phase, RoundScheduler};
use crate::error::{Error, Result};
use crate::field::FieldVector;
use crate::model::RankPartition;

/// `|group ∩ I_2|`, revealing nothing else about `X_2`.
pub fn group_cardinality<R: Rng>(sched: &mut RoundScheduler<'_, R>, group: &[usize], phase: Phase) -> Result<u64> {
    let payload = FieldVector::indicator(sched.modulus(), sched.alphabet_len(), group.iter().copied())?;
    let m = sched.request_payload(phase, &payload)?.value();
    if m > group.len() as u64 {
        return Err(Error::InvalidCardinality { m, min: 0, max: group.len() as u64 });
    }
    Ok(m)
}

/// CarPSI on `J_r`: returns `M_r = X_{J_r}ᵀ X_2`.
pub fn carpsi<R: Rng>(sched: &mut RoundScheduler<'_, R>, rp: &RankPartition, r: usize) -> Result<u64> {
    group_cardinality(sched, rp.group(r)?, Phase::CarPsi)
}

/// Recovers `group ∩ I_2` given its size `m`. Every member except the
/// largest index is probed with `e_j`; the held-out bit is `m` minus the sum
/// of the probed bits.
pub fn find_members<R: Rng>(
    sched: &mut RoundScheduler<'_, R>,
    group: &[usize],
    m: u64,
    phase: Phase,
) -> Result<BTreeSet<usize>> {
    let alpha = group.len() as u64;
    if m < 1 || m + 1 > alpha {
        return Err(Error::InvalidCardinality { m, min: 1, max: alpha.saturating_sub(1) });
    }
    let held_out = *group.iter().max().expect("group has at least two members");
    let (q, len) = (sched.modulus(), sched.alphabet_len());
    let mut members = BTreeSet::new();
    let mut ones = 0u64;
    for &j in group.iter().filter(|&&j| j != held_out) {
        let bit = sched.request_payload(phase, &FieldVector::basis(q, len, j)?)?.value();
        match bit {
            0 => {}
            1 => {
                members.insert(j);
                ones += 1;
            }
            value => return Err(Error::CorruptBit { index: j, value }),
        }
    }
    match m.checked_sub(ones) {
        Some(0) => {}
        Some(1) => {
            members.insert(held_out);
        }
        _ => {
            let value = (m as i64 - ones as i64).rem_euclid(q.get() as i64) as u64;
            return Err(Error::CorruptBit { index: held_out, value });
        }
    }
    Ok(members)
}

/// FindPSI on `J_r` with known cardinality `m_r`.
pub fn findpsi<R: Rng>(
    sched: &mut RoundScheduler<'_, R>,
    rp: &RankPartition,
    r: usize,
    m_r: u64,
) -> Result<BTreeSet<usize>> {
    find_members(sched, rp.group(r)?, m_r, Phase::FindPsi)
}
