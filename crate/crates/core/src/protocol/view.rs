//! What the client can extract from its own transcript.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use super::scheduler::{Message, Phase, Transcript};
use crate::error::{Error, Result};
use crate::field::Prime;
use crate::model::RankPartition;

/// A payload the client recovered: the 0/1 vector it added to the round mask
/// (as its support) and the decoded value `payloadᵀ X_2`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct DecodedPayload {
    pub phase: Phase,
    pub round: usize,
    pub support: Vec<usize>,
    pub value: u64,
}

/// Client knowledge about `X_2` after the optimizer: the rank `R` and the
/// bits of `X_2` it can pin down.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct ClientKnowledge {
    pub rank: usize,
    pub bits: BTreeMap<usize, bool>,
}

/// Pairs every offset query with its round's reference query and decodes
/// `(Q_n − Q_1, A_n − A_1)`.
pub fn decode_transcript(transcript: &Transcript, modulus: Prime) -> Result<Vec<DecodedPayload>> {
    let q = modulus.get();
    let mut out = Vec::new();
    let mut reference: Option<&Message> = None;
    for m in transcript.messages() {
        if reference.is_none_or(|r| r.round != m.round) {
            if m.query.is_empty() {
                return Err(Error::MalformedTranscript("queries were not recorded".into()));
            }
            reference = Some(m);
            continue;
        }
        let r = reference.expect("reference set above");
        if m.query.len() != r.query.len() {
            return Err(Error::MalformedTranscript(format!("query length changes in round {}", m.round)));
        }
        let mut support = Vec::new();
        for (j, (a, b)) in m.query.iter().zip(&r.query).enumerate() {
            match (a + q - b) % q {
                0 => {}
                1 => support.push(j),
                other => {
                    return Err(Error::MalformedTranscript(format!(
                        "payload coordinate {j} is {other} in round {}",
                        m.round
                    )))
                }
            }
        }
        out.push(DecodedPayload { phase: m.phase, round: m.round, support, value: (m.answer + q - r.answer) % q });
    }
    Ok(out)
}

/// Derives the client's knowledge of `X_2` from an optimizer transcript.
/// Each decoded payload is a linear constraint on the bits of `X_2`;
/// constraints are propagated until nothing changes. A skipped final
/// singleton group is known to be in `P_2` because the intersection is
/// non-empty.
pub fn client_knowledge(transcript: &Transcript, rp: &RankPartition, modulus: Prime) -> Result<ClientKnowledge> {
    let decoded = decode_transcript(transcript, modulus)?;
    let constraints: Vec<&DecodedPayload> =
        decoded.iter().filter(|d| matches!(d.phase, Phase::CarPsi | Phase::FindPsi)).collect();
    let cards: Vec<u64> = constraints.iter().filter(|d| d.phase == Phase::CarPsi).map(|d| d.value).collect();

    let mut bits = BTreeMap::new();
    loop {
        let mut changed = false;
        for c in &constraints {
            let known_ones = c.support.iter().filter(|j| bits.get(*j) == Some(&true)).count() as u64;
            let unknown: Vec<usize> = c.support.iter().copied().filter(|j| !bits.contains_key(j)).collect();
            let remaining = c
                .value
                .checked_sub(known_ones)
                .filter(|&rem| rem <= unknown.len() as u64)
                .ok_or_else(|| Error::MalformedTranscript("inconsistent decoded values".into()))?;
            if unknown.is_empty() {
                continue;
            }
            if remaining == 0 || remaining == unknown.len() as u64 {
                for j in unknown {
                    bits.insert(j, remaining > 0);
                }
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }

    let mut rank = cards.len();
    let levels = rp.levels();
    if rank + 1 == levels && cards.iter().all(|&m| m == 0) && rp.alpha(levels)? == 1 {
        rank = levels;
        bits.insert(rp.group(levels)?[0], true);
    }
    Ok(ClientKnowledge { rank, bits })
}

/// The decoded values as a set of group-level facts: `{M_1..M_R}` and the
/// FindPSI membership bits.
pub fn revealed_values(decoded: &[DecodedPayload]) -> (Vec<u64>, BTreeMap<usize, u64>) {
    let cards = decoded.iter().filter(|d| d.phase == Phase::CarPsi).map(|d| d.value).collect();
    let probes = decoded
        .iter()
        .filter(|d| d.phase == Phase::FindPsi)
        .filter_map(|d| d.support.first().map(|&j| (j, d.value)))
        .collect();
    (cards, probes)
}

/// Indices probed individually during FindPSI.
pub fn probed_indices(decoded: &[DecodedPayload]) -> BTreeSet<usize> {
    revealed_values(decoded).1.into_keys().collect()
}
