//! Exact leakage accounting. With `P_1` and `f` fixed, every view the
//! client may end up with is a deterministic function of `P_2`, so the
//! information it carries about `P_2` under a uniform prior is the entropy
//! of the partition that view induces on the space of possible `P_2`.

use std::collections::{BTreeMap, BTreeSet};

use itertools::Itertools;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{brute_force_optimum, Entity, FeasibleSet, Scenario};
use crate::protocol::{client_knowledge, naive_psi, optimize, ClientKnowledge};

/// Largest alphabet the enumeration accepts.
pub const LEAKAGE_MAX_K: usize = 14;

/// A partition of the admissible server sets. Blocks list positions into the
/// enumeration order of [`admissible_server_sets`] and appear in order of
/// their first member, so two partitions of the same space are equal exactly
/// when their block lists are equal.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LeakagePartition {
    blocks: Vec<Vec<usize>>,
    size: usize,
}

impl LeakagePartition {
    /// Groups positions by equal view value.
    pub fn from_views<V: Ord>(views: &[V]) -> Self {
        let mut index: BTreeMap<&V, usize> = BTreeMap::new();
        let mut blocks: Vec<Vec<usize>> = Vec::new();
        for (i, v) in views.iter().enumerate() {
            let b = *index.entry(v).or_insert_with(|| {
                blocks.push(Vec::new());
                blocks.len() - 1
            });
            blocks[b].push(i);
        }
        LeakagePartition { blocks, size: views.len() }
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn block_count(&self) -> usize {
        self.blocks.len()
    }

    pub fn space_size(&self) -> usize {
        self.size
    }

    fn labels(&self) -> Vec<usize> {
        let mut labels = vec![0; self.size];
        for (b, block) in self.blocks.iter().enumerate() {
            for &i in block {
                labels[i] = b;
            }
        }
        labels
    }

    /// True when every block of `self` lies inside a block of `coarser`.
    pub fn refines(&self, coarser: &LeakagePartition) -> bool {
        if self.size != coarser.size {
            return false;
        }
        let labels = coarser.labels();
        self.blocks.iter().all(|b| b.iter().map(|&i| labels[i]).all_equal())
    }
}

/// `H(view)` in bits under the uniform prior, which equals `I(P_2; view)`.
pub fn mutual_information_bits(p: &LeakagePartition) -> f64 {
    let n = p.size as f64;
    p.blocks
        .iter()
        .map(|b| {
            let prob = b.len() as f64 / n;
            -prob * prob.log2()
        })
        .sum()
}

/// Every size-`P2` subset of the alphabet that meets `P_1`, in
/// lexicographic order.
pub fn admissible_server_sets(s: &Scenario) -> Result<Vec<BTreeSet<usize>>> {
    let k = s.k();
    if k > LEAKAGE_MAX_K {
        return Err(Error::EnumerationTooLarge { size: 1u128 << k, limit: 1u128 << LEAKAGE_MAX_K });
    }
    Ok((0..k)
        .combinations(s.set2().len())
        .map(|c| c.into_iter().collect::<BTreeSet<usize>>())
        .filter(|c| c.iter().any(|i| s.set1().contains(*i)))
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LeakageBits {
    pub scheme: f64,
    pub nominal: f64,
    pub naive: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct LeakageReport {
    pub space: Vec<BTreeSet<usize>>,
    /// Partition by the client's transcript-derived knowledge.
    pub scheme: LeakagePartition,
    /// Partition by `P*` alone.
    pub nominal: LeakagePartition,
    /// Partition by `P_1 ∩ P_2`, what naive PSI reveals.
    pub naive: LeakagePartition,
    pub bits: LeakageBits,
}

impl LeakageReport {
    /// The scheme leaks exactly the nominal amount and naive PSI leaks at
    /// least as much.
    pub fn identity_holds(&self) -> bool {
        self.scheme == self.nominal
            && self.naive.refines(&self.scheme)
            && (self.bits.scheme - self.bits.nominal).abs() <= 1e-9
    }
}

pub fn leakage_partitions(s: &Scenario) -> Result<LeakageReport> {
    let space = admissible_server_sets(s)?;
    let mut scheme: Vec<ClientKnowledge> = Vec::with_capacity(space.len());
    let mut nominal: Vec<BTreeSet<usize>> = Vec::with_capacity(space.len());
    let mut naive: Vec<BTreeSet<usize>> = Vec::with_capacity(space.len());
    for p2 in &space {
        let variant = s.clone().with_set2(FeasibleSet::new(Entity::E2, p2.iter().copied(), s.k())?)?;
        let run = optimize(&variant)?;
        scheme.push(client_knowledge(&run.transcript, &run.partition, variant.prime())?);
        nominal.push(brute_force_optimum(&variant)?);
        naive.push(naive_psi(&variant)?.intersection);
    }
    let scheme = LeakagePartition::from_views(&scheme);
    let nominal = LeakagePartition::from_views(&nominal);
    let naive = LeakagePartition::from_views(&naive);
    let bits = LeakageBits {
        scheme: mutual_information_bits(&scheme),
        nominal: mutual_information_bits(&nominal),
        naive: mutual_information_bits(&naive),
    };
    Ok(LeakageReport { space, scheme, nominal, naive, bits })
}
