//! Parameter sweeps. For each alphabet size the sweep enumerates every
//! admissible set pair, objective and database count when that fits in the
//! row budget, and otherwise draws that many rows from a seeded stream.

use std::io::Write;
use std::ops::RangeInclusive;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::analytics::{d_psi, d_thpsi, leakage_partitions, predicted_cost};
use crate::error::{Error, Result};
use crate::fixtures;
use crate::model::{brute_force_optimum, random_objective, Alphabet, Entity, FeasibleSet, Objective, Scenario, Sense};
use crate::protocol::{optimize_with, seeded_stream, thpsi};

const MAX_K: usize = 14;
const MAX_N2: usize = 8;
const MAX_T: usize = 8;
const SAMPLE_STREAM: u64 = 0x5eed;
const THPSI_STREAM: u64 = 0x7415;
const LEAKAGE_STREAM: u64 = 0x1ea4;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SweepGrid {
    pub k: RangeInclusive<usize>,
    pub n2: RangeInclusive<usize>,
    pub t: RangeInclusive<usize>,
    /// Row budget per alphabet size; above it rows are sampled.
    pub max_rows_per_k: usize,
    pub seed: u64,
    pub sense: Sense,
}

impl Default for SweepGrid {
    fn default() -> Self {
        SweepGrid { k: 4..=6, n2: 2..=4, t: 1..=3, max_rows_per_k: 50_000, seed: 0, sense: Sense::Minimize }
    }
}

impl SweepGrid {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::GridTooLarge(what.to_string()));
        if self.k.is_empty() || *self.k.start() < 1 || *self.k.end() > MAX_K {
            return bad("K must lie in 1..=14");
        }
        if self.n2.is_empty() || *self.n2.start() < 2 || *self.n2.end() > MAX_N2 {
            return bad("N2 must lie in 2..=8");
        }
        if self.t.is_empty() || *self.t.start() < 1 || *self.t.end() > MAX_T {
            return bad("T must lie in 1..=8");
        }
        if self.max_rows_per_k == 0 {
            return bad("row budget must be positive");
        }
        Ok(())
    }
}

/// One optimizer run. Serializes to the sweep CSV columns.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SweepRow {
    #[serde(rename = "K")]
    pub k: usize,
    #[serde(rename = "P1")]
    pub p1: usize,
    #[serde(rename = "P2")]
    pub p2: usize,
    #[serde(rename = "N2")]
    pub n2: usize,
    #[serde(rename = "T")]
    pub t: usize,
    pub seed: u64,
    #[serde(rename = "R")]
    pub r: usize,
    #[serde(rename = "alpha_R")]
    pub alpha_r: usize,
    #[serde(rename = "M_R")]
    pub m_r: usize,
    #[serde(rename = "D_sim")]
    pub d_sim: usize,
    #[serde(rename = "D_pred")]
    pub d_pred: usize,
    #[serde(rename = "D_psi")]
    pub d_psi: usize,
    #[serde(skip)]
    pub levels: usize,
    #[serde(skip)]
    pub skipped: bool,
    #[serde(skip)]
    pub pstar_ok: bool,
}

impl SweepRow {
    pub fn cost_matches(&self) -> bool {
        self.d_sim == self.d_pred && self.pstar_ok
    }

    pub fn within_psi_bound(&self) -> bool {
        self.d_sim <= self.d_psi
    }

    /// When the last singleton is skipped the cost is `D_PSI(L − 1, N2)`.
    pub fn skip_rule_holds(&self) -> bool {
        !self.skipped || self.d_sim == d_psi(self.levels - 1, self.n2)
    }
}

/// One threshold PSI run.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ThPsiRow {
    #[serde(rename = "K")]
    pub k: usize,
    #[serde(rename = "P1")]
    pub p1: usize,
    #[serde(rename = "P2")]
    pub p2: usize,
    #[serde(rename = "N2")]
    pub n2: usize,
    pub t: usize,
    pub seed: u64,
    #[serde(rename = "M")]
    pub m: usize,
    pub revealed: bool,
    #[serde(rename = "D_sim")]
    pub d_sim: usize,
    #[serde(rename = "D_pred")]
    pub d_pred: usize,
    #[serde(skip)]
    pub correct: bool,
}

impl ThPsiRow {
    pub fn cost_matches(&self) -> bool {
        self.d_sim == self.d_pred && self.correct
    }
}

struct Task {
    k: usize,
    set1: u32,
    set2: u32,
    t: usize,
    values: Vec<u32>,
    n2: usize,
}

fn bits(mask: u32) -> impl Iterator<Item = usize> {
    (0..32).filter(move |i| mask >> i & 1 == 1)
}

fn admissible(k: usize, set1: u32, set2: u32) -> bool {
    (set1.count_ones() + set2.count_ones()) as usize > k
}

fn binomial(n: usize, r: usize) -> u128 {
    if r > n {
        return 0;
    }
    (0..r).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

/// Number of admissible pairs with `|P1| = p1`, summed with `weight(p1)`.
fn weighted_pair_count(k: usize, weight: impl Fn(usize) -> u128) -> u128 {
    let mut total = 0u128;
    for p1 in 1..=k {
        for p2 in 1..=k {
            if p1 + p2 > k {
                total += binomial(k, p1) * binomial(k, p2) * weight(p1);
            }
        }
    }
    total
}

fn all_pairs(k: usize) -> impl Iterator<Item = (u32, u32)> {
    let full = 1u32 << k;
    (1..full).flat_map(move |a| (1..full).filter(move |&b| admissible(k, a, b)).map(move |b| (a, b)))
}

fn sample_pair<R: Rng>(rng: &mut R, k: usize) -> (u32, u32) {
    let full = 1u32 << k;
    loop {
        let (a, b) = (rng.random_range(1..full), rng.random_range(1..full));
        if admissible(k, a, b) {
            return (a, b);
        }
    }
}

fn build_scenario(k: usize, set1: u32, set2: u32, objective: Objective, n2: usize, seed: u64) -> Result<Scenario> {
    Scenario::new(
        Alphabet::numbered(k)?,
        FeasibleSet::new(Entity::E1, bits(set1), k)?,
        FeasibleSet::new(Entity::E2, bits(set2), k)?,
        objective,
        n2,
        None,
        seed,
    )
}

fn optimizer_tasks(grid: &SweepGrid, k: usize) -> Vec<Task> {
    let n2s: Vec<usize> = grid.n2.clone().collect();
    let exhaustive = weighted_pair_count(k, |p1| {
        grid.t.clone().map(|t| (t as u128).pow(p1 as u32)).sum::<u128>() * n2s.len() as u128
    });
    let mut tasks = Vec::new();
    if exhaustive <= grid.max_rows_per_k as u128 {
        for (set1, set2) in all_pairs(k) {
            let positions: Vec<usize> = bits(set1).collect();
            for t in grid.t.clone() {
                for code in 0..(t as u64).pow(positions.len() as u32) {
                    let mut values = vec![1u32; k];
                    let mut rest = code;
                    for &pos in &positions {
                        values[pos] = (rest % t as u64) as u32 + 1;
                        rest /= t as u64;
                    }
                    for &n2 in &n2s {
                        tasks.push(Task { k, set1, set2, t, values: values.clone(), n2 });
                    }
                }
            }
        }
    } else {
        let mut rng = seeded_stream(grid.seed, SAMPLE_STREAM + k as u64);
        for _ in 0..grid.max_rows_per_k {
            let (set1, set2) = sample_pair(&mut rng, k);
            let t = rng.random_range(grid.t.clone());
            let values = random_objective(&mut rng, k, t as u32, grid.sense).values().to_vec();
            let n2 = rng.random_range(grid.n2.clone());
            tasks.push(Task { k, set1, set2, t, values, n2 });
        }
    }
    tasks
}

fn run_optimizer_task(task: &Task, sense: Sense, seed: u64) -> Result<SweepRow> {
    let objective = Objective::new(task.values.clone(), sense);
    let s = build_scenario(task.k, task.set1, task.set2, objective, task.n2, seed)?;
    let out = optimize_with(&s, false)?;
    let pred = predicted_cost(out.rank, out.alpha, out.multiplicity, task.n2, out.skipped);
    Ok(SweepRow {
        k: task.k,
        p1: s.set1().len(),
        p2: s.set2().len(),
        n2: task.n2,
        t: task.t,
        seed,
        r: out.rank,
        alpha_r: out.alpha,
        m_r: out.multiplicity,
        d_sim: out.transcript.total_download(),
        d_pred: pred.d,
        d_psi: d_psi(s.set1().len(), task.n2),
        levels: out.partition.levels(),
        skipped: out.skipped,
        pstar_ok: out.pstar == brute_force_optimum(&s)?,
    })
}

/// Runs the optimizer over the grid. Rows come back in a fixed order
/// regardless of how the work is scheduled.
pub fn sweep(grid: &SweepGrid) -> Result<Vec<SweepRow>> {
    grid.validate()?;
    let mut rows = Vec::new();
    for k in grid.k.clone() {
        let tasks = optimizer_tasks(grid, k);
        let offset = rows.len() as u64;
        let chunk: Vec<SweepRow> = tasks
            .par_iter()
            .enumerate()
            .map(|(i, task)| run_optimizer_task(task, grid.sense, grid.seed.wrapping_add(offset + i as u64)))
            .collect::<Result<_>>()?;
        rows.extend(chunk);
    }
    Ok(rows)
}

fn thpsi_tasks(grid: &SweepGrid, k: usize) -> Vec<Task> {
    let n2s: Vec<usize> = grid.n2.clone().collect();
    let exhaustive = weighted_pair_count(k, |p1| (p1 * n2s.len()) as u128);
    let mut tasks = Vec::new();
    if exhaustive <= grid.max_rows_per_k as u128 {
        for (set1, set2) in all_pairs(k) {
            for t in 1..=set1.count_ones() as usize {
                for &n2 in &n2s {
                    tasks.push(Task { k, set1, set2, t, values: Vec::new(), n2 });
                }
            }
        }
    } else {
        let mut rng = seeded_stream(grid.seed, THPSI_STREAM + k as u64);
        for _ in 0..grid.max_rows_per_k {
            let (set1, set2) = sample_pair(&mut rng, k);
            let t = rng.random_range(1..=set1.count_ones() as usize);
            let n2 = rng.random_range(grid.n2.clone());
            tasks.push(Task { k, set1, set2, t, values: Vec::new(), n2 });
        }
    }
    tasks
}

fn run_thpsi_task(task: &Task, seed: u64) -> Result<ThPsiRow> {
    let objective = Objective::new(vec![1; task.k], Sense::Minimize);
    let s = build_scenario(task.k, task.set1, task.set2, objective, task.n2, seed)?;
    let out = thpsi(&s, task.t)?;
    let truth = s.set1().intersection(s.set2());
    let correct =
        out.cardinality == truth.len() && out.intersection.as_ref() == (truth.len() >= task.t).then_some(&truth);
    Ok(ThPsiRow {
        k: task.k,
        p1: s.set1().len(),
        p2: s.set2().len(),
        n2: task.n2,
        t: task.t,
        seed,
        m: out.cardinality,
        revealed: out.intersection.is_some(),
        d_sim: out.transcript.total_download(),
        d_pred: d_thpsi(out.cardinality, task.t, s.set1().len(), task.n2),
        correct,
    })
}

/// Threshold PSI over every admissible set pair, `N2` in the grid and every
/// threshold `1..=P1` (sampled above the row budget).
pub fn thpsi_sweep(grid: &SweepGrid) -> Result<Vec<ThPsiRow>> {
    grid.validate()?;
    let mut rows = Vec::new();
    for k in grid.k.clone() {
        let tasks = thpsi_tasks(grid, k);
        let offset = rows.len() as u64;
        let chunk: Vec<ThPsiRow> = tasks
            .par_iter()
            .enumerate()
            .map(|(i, task)| run_thpsi_task(task, grid.seed.wrapping_add(offset + i as u64)))
            .collect::<Result<_>>()?;
        rows.extend(chunk);
    }
    Ok(rows)
}

/// A random admissible scenario with `K` drawn from `k`.
pub fn random_scenario<R: Rng>(
    rng: &mut R,
    k: RangeInclusive<usize>,
    n2: RangeInclusive<usize>,
    t: RangeInclusive<usize>,
    sense: Sense,
) -> Result<Scenario> {
    let k = rng.random_range(k);
    let (set1, set2) = sample_pair(rng, k);
    let t = rng.random_range(t);
    let objective = random_objective(rng, k, t as u32, sense);
    let n2 = rng.random_range(n2);
    let seed = rng.random();
    build_scenario(k, set1, set2, objective, n2, seed)
}

pub fn write_csv<T: Serialize, W: Write>(rows: &[T], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VerifySummary {
    pub rows: usize,
    pub optimizer_matches: usize,
    pub psi_bound_holds: usize,
    pub skip_rows: usize,
    pub skip_rule_holds: usize,
    pub thpsi_rows: usize,
    pub thpsi_matches: usize,
    pub leakage_cases: usize,
    pub leakage_passes: usize,
}

fn rate(hits: usize, total: usize) -> String {
    if hits == total {
        "100%".into()
    } else {
        format!("{:.3}%", 100.0 * hits as f64 / total as f64)
    }
}

impl VerifySummary {
    pub fn all_pass(&self) -> bool {
        self.optimizer_matches == self.rows
            && self.psi_bound_holds == self.rows
            && self.skip_rule_holds == self.skip_rows
            && self.thpsi_matches == self.thpsi_rows
            && self.leakage_passes == self.leakage_cases
    }

    pub fn headline(&self) -> String {
        format!(
            "theorem2: {} theorem3: {} leakage: {}",
            rate(self.optimizer_matches, self.rows),
            rate(self.thpsi_matches, self.thpsi_rows),
            rate(self.leakage_passes, self.leakage_cases)
        )
    }
}

/// Optimizer and threshold PSI sweeps over `grid`, plus the leakage identity
/// on the bundled fixtures and `leakage_samples` random scenarios with
/// `K ≤ 8`.
pub fn verify(grid: &SweepGrid, leakage_samples: usize) -> Result<VerifySummary> {
    let rows = sweep(grid)?;
    let th = thpsi_sweep(grid)?;

    let mut cases = fixtures::all().into_iter().map(|(_, s)| s).collect::<Vec<_>>();
    let mut rng = seeded_stream(grid.seed, LEAKAGE_STREAM);
    let k_hi = (*grid.k.end()).min(8);
    let k_lo = (*grid.k.start()).min(k_hi);
    for _ in 0..leakage_samples {
        cases.push(random_scenario(&mut rng, k_lo..=k_hi, grid.n2.clone(), grid.t.clone(), grid.sense)?);
    }
    let leakage_passes = cases
        .par_iter()
        .map(|s| leakage_partitions(s).map(|r| r.identity_holds() as usize))
        .try_reduce(|| 0, |a, b| Ok(a + b))?;

    Ok(VerifySummary {
        rows: rows.len(),
        optimizer_matches: rows.iter().filter(|r| r.cost_matches()).count(),
        psi_bound_holds: rows.iter().filter(|r| r.within_psi_bound()).count(),
        skip_rows: rows.iter().filter(|r| r.skipped).count(),
        skip_rule_holds: rows.iter().filter(|r| r.skipped && r.skip_rule_holds()).count(),
        thpsi_rows: th.len(),
        thpsi_matches: th.iter().filter(|r| r.cost_matches()).count(),
        leakage_cases: cases.len(),
        leakage_passes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_grid() -> SweepGrid {
        SweepGrid { k: 3..=4, n2: 2..=3, t: 1..=2, max_rows_per_k: 10_000, seed: 3, sense: Sense::Minimize }
    }

    #[test]
    fn grid_bounds() {
        assert!(SweepGrid::default().validate().is_ok());
        let mut g = SweepGrid { k: 4..=15, ..SweepGrid::default() };
        assert!(matches!(sweep(&g), Err(Error::GridTooLarge(_))));
        g = SweepGrid { n2: 1..=3, ..SweepGrid::default() };
        assert!(g.validate().is_err());
        g = SweepGrid { t: 1..=9, ..SweepGrid::default() };
        assert!(g.validate().is_err());
    }

    #[test]
    fn exhaustive_counts_match_formula() {
        let g = small_grid();
        for k in g.k.clone() {
            let tasks = optimizer_tasks(&g, k);
            let expected = weighted_pair_count(k, |p1| (1 + 2u128.pow(p1 as u32)) * 2);
            assert_eq!(tasks.len() as u128, expected);
            assert_eq!(all_pairs(k).count() as u128, weighted_pair_count(k, |_| 1));
        }
    }

    #[test]
    fn small_sweep_all_rows_match() {
        let rows = sweep(&small_grid()).unwrap();
        assert!(!rows.is_empty());
        assert!(rows.iter().all(|r| r.cost_matches() && r.within_psi_bound() && r.skip_rule_holds()));
        assert!(rows.iter().any(|r| r.skipped));
        let th = thpsi_sweep(&small_grid()).unwrap();
        assert!(th.iter().all(ThPsiRow::cost_matches));
        assert!(th.iter().any(|r| r.m == r.p1) && th.iter().any(|r| r.m < r.t));
    }

    #[test]
    fn sampled_sweep_respects_budget() {
        let g = SweepGrid { k: 7..=7, max_rows_per_k: 500, ..small_grid() };
        let rows = sweep(&g).unwrap();
        assert_eq!(rows.len(), 500);
        assert!(rows.iter().all(SweepRow::cost_matches));
    }

    #[test]
    fn csv_header() {
        let rows = sweep(&SweepGrid { k: 3..=3, ..small_grid() }).unwrap();
        let mut buf = Vec::new();
        write_csv(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().next().unwrap(), "K,P1,P2,N2,T,seed,R,alpha_R,M_R,D_sim,D_pred,D_psi");
        assert_eq!(text.lines().count(), rows.len() + 1);
    }

    #[test]
    fn verify_small_grid() {
        let summary = verify(&small_grid(), 5).unwrap();
        assert!(summary.all_pass(), "{summary:?}");
        assert_eq!(summary.headline(), "theorem2: 100% theorem3: 100% leakage: 100%");
        assert_eq!(summary.leakage_cases, 8);
    }

    #[test]
    fn degenerate_single_value_grid() {
        let g = SweepGrid { t: 1..=1, ..small_grid() };
        let rows = sweep(&g).unwrap();
        assert!(rows.iter().all(|r| r.levels == 1 && r.cost_matches()));
    }
}
