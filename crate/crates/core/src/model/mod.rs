//! Problem model: the global alphabet, the two private feasible sets, the
//! public objective and the rank partition the client derives from its own
//! set.
//!
//! Item indices are 0-based positions in the alphabet. Ranks are 1-based
//! (`r = 1` is the best value group) so that they read the same as the
//! `R` reported in cost formulas.

mod scenario;

use std::collections::BTreeSet;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{FieldVector, Prime};

pub use scenario::{Scenario, ScenarioFile};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Alphabet {
    labels: Vec<String>,
}

impl Alphabet {
    pub fn new<S: Into<String>>(labels: impl IntoIterator<Item = S>) -> Result<Self> {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        if labels.is_empty() {
            return Err(Error::InvalidAlphabet("alphabet must not be empty".into()));
        }
        let distinct: BTreeSet<&str> = labels.iter().map(String::as_str).collect();
        if distinct.len() != labels.len() {
            return Err(Error::InvalidAlphabet("labels must be distinct".into()));
        }
        Ok(Alphabet { labels })
    }

    /// Alphabet `x1, x2, ..., xK`.
    pub fn numbered(k: usize) -> Result<Self> {
        Self::new((1..=k).map(|i| format!("x{i}")))
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, index: usize) -> Option<&str> {
        self.labels.get(index).map(String::as_str)
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    /// Renders a set of indices as `{A,C,G}`.
    pub fn format_set(&self, indices: &BTreeSet<usize>) -> String {
        let names: Vec<&str> = indices.iter().filter_map(|&i| self.label(i)).collect();
        format!("{{{}}}", names.join(","))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Entity {
    E1,
    E2,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeasibleSet {
    indices: BTreeSet<usize>,
    owner: Entity,
}

impl FeasibleSet {
    pub fn new(owner: Entity, indices: impl IntoIterator<Item = usize>, k: usize) -> Result<Self> {
        let indices: BTreeSet<usize> = indices.into_iter().collect();
        if indices.is_empty() {
            return Err(Error::InvalidScenario(format!("feasible set of {owner:?} is empty")));
        }
        if let Some(&index) = indices.iter().find(|&&i| i >= k) {
            return Err(Error::IndexOutOfRange { index, size: k });
        }
        Ok(FeasibleSet { indices, owner })
    }

    pub fn from_labels<S: AsRef<str>>(
        owner: Entity,
        labels: impl IntoIterator<Item = S>,
        alphabet: &Alphabet,
    ) -> Result<Self> {
        let indices = labels
            .into_iter()
            .map(|l| {
                alphabet
                    .index_of(l.as_ref())
                    .ok_or_else(|| Error::InvalidScenario(format!("unknown label {:?}", l.as_ref())))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(owner, indices, alphabet.len())
    }

    pub fn indices(&self) -> &BTreeSet<usize> {
        &self.indices
    }

    pub fn owner(&self) -> Entity {
        self.owner
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn contains(&self, index: usize) -> bool {
        self.indices.contains(&index)
    }

    pub fn intersection(&self, other: &FeasibleSet) -> BTreeSet<usize> {
        self.indices.intersection(&other.indices).copied().collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IncidenceVector {
    bits: Vec<bool>,
}

impl IncidenceVector {
    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn popcount(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn to_field(&self, modulus: Prime) -> FieldVector {
        FieldVector::from_residues(modulus, self.bits.iter().map(|&b| b as u64))
    }
}

pub fn incidence_vector(set: &FeasibleSet, alphabet: &Alphabet) -> Result<IncidenceVector> {
    let k = alphabet.len();
    let mut bits = vec![false; k];
    for &i in set.indices() {
        if i >= k {
            return Err(Error::IndexOutOfRange { index: i, size: k });
        }
        bits[i] = true;
    }
    Ok(IncidenceVector { bits })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sense {
    #[serde(rename = "min")]
    Minimize,
    #[serde(rename = "max")]
    Maximize,
}

impl Sense {
    /// True when `a` is strictly better than `b`.
    pub fn better(self, a: u32, b: u32) -> bool {
        match self {
            Sense::Minimize => a < b,
            Sense::Maximize => a > b,
        }
    }
}

/// Public objective `f`: one value per alphabet item, plus the sense of
/// optimization.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Objective {
    values: Vec<u32>,
    sense: Sense,
}

impl Objective {
    pub fn new(values: Vec<u32>, sense: Sense) -> Self {
        Objective { values, sense }
    }

    pub fn values(&self) -> &[u32] {
        &self.values
    }

    pub fn value(&self, index: usize) -> Option<u32> {
        self.values.get(index).copied()
    }

    pub fn sense(&self) -> Sense {
        self.sense
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Each item's value is drawn i.i.d. uniformly from `1..=t`.
pub fn random_objective<R: Rng + ?Sized>(rng: &mut R, k: usize, t: u32, sense: Sense) -> Objective {
    assert!(t >= 1, "value set must be non-empty");
    Objective::new((0..k).map(|_| rng.random_range(1..=t)).collect(), sense)
}

/// Equal-value groups `J_1..J_L` of the client's set, ordered best to
/// worst. Indices inside a group are ascending.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankPartition {
    groups: Vec<Vec<usize>>,
    values: Vec<u32>,
    alphabet_len: usize,
}

impl RankPartition {
    /// Number of groups `L`.
    pub fn levels(&self) -> usize {
        self.groups.len()
    }

    pub fn groups(&self) -> &[Vec<usize>] {
        &self.groups
    }

    pub fn values(&self) -> &[u32] {
        &self.values
    }

    pub fn alphabet_len(&self) -> usize {
        self.alphabet_len
    }

    pub fn alphas(&self) -> Vec<usize> {
        self.groups.iter().map(Vec::len).collect()
    }

    fn check_rank(&self, r: usize) -> Result<usize> {
        if r == 0 || r > self.levels() {
            return Err(Error::RankOutOfRange { rank: r, levels: self.levels() });
        }
        Ok(r - 1)
    }

    /// `J_r` for a 1-based rank.
    pub fn group(&self, r: usize) -> Result<&[usize]> {
        Ok(&self.groups[self.check_rank(r)?])
    }

    pub fn alpha(&self, r: usize) -> Result<usize> {
        Ok(self.group(r)?.len())
    }

    pub fn value(&self, r: usize) -> Result<u32> {
        Ok(self.values[self.check_rank(r)?])
    }

    /// 1-based rank of the group holding `index`.
    pub fn rank_of(&self, index: usize) -> Option<usize> {
        self.groups.iter().position(|g| g.contains(&index)).map(|p| p + 1)
    }

    /// `J_1 ∪ ... ∪ J_r`.
    pub fn union_through(&self, r: usize) -> BTreeSet<usize> {
        self.groups.iter().take(r).flatten().copied().collect()
    }
}

pub fn rank_partition(p1: &FeasibleSet, f: &Objective) -> Result<RankPartition> {
    let k = f.len();
    let mut values: Vec<u32> = Vec::with_capacity(p1.len());
    for &i in p1.indices() {
        let v = f.value(i).ok_or(Error::IndexOutOfRange { index: i, size: k })?;
        values.push(v);
    }
    values.sort_unstable();
    values.dedup();
    if f.sense() == Sense::Maximize {
        values.reverse();
    }
    let groups = values.iter().map(|&v| p1.indices().iter().copied().filter(|&i| f.values[i] == v).collect()).collect();
    Ok(RankPartition { groups, values, alphabet_len: k })
}

/// `X_{J_r}`: ones exactly at the indices of group `r`.
pub fn group_indicator(rp: &RankPartition, r: usize, modulus: Prime) -> Result<FieldVector> {
    FieldVector::indicator(modulus, rp.alphabet_len, rp.group(r)?.iter().copied())
}

/// All optimizers of `f` over `P_1 ∩ P_2`, ties included.
pub fn brute_force_optimum(s: &Scenario) -> Result<BTreeSet<usize>> {
    optimum_over(&s.set1().intersection(s.set2()), s.objective())
}

/// All optimizers of `f` over an arbitrary candidate set.
pub fn optimum_over(candidates: &BTreeSet<usize>, f: &Objective) -> Result<BTreeSet<usize>> {
    let best = candidates
        .iter()
        .map(|&i| f.values[i])
        .reduce(|a, b| if f.sense.better(b, a) { b } else { a })
        .ok_or(Error::EmptyIntersection)?;
    Ok(candidates.iter().copied().filter(|&i| f.values[i] == best).collect())
}
