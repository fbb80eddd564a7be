//! Probability, over uniformly random objectives, that the sequential scheme
//! costs exactly as much as naive PSI.

use num_rational::Ratio;
use num_traits::Zero;
use rayon::prelude::*;
use serde::Serialize;

use super::cost::d_psi;
use crate::error::{Error, Result};
use crate::model::{Alphabet, Entity, FeasibleSet, Objective, Scenario, Sense};
use crate::protocol::optimize_with;

pub type Rational = Ratio<u128>;

/// Largest number of objective assignments [`peq_exhaustive`] will visit.
pub const EXHAUSTIVE_LIMIT: u128 = 10_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PeqTerm {
    pub r: usize,
    #[serde(serialize_with = "ser_ratio")]
    pub probability: Rational,
    /// Whether `1{M < P1 − r + 1}` keeps this term.
    pub included: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PeqResult {
    #[serde(serialize_with = "ser_ratio")]
    pub value: Rational,
    pub terms: Vec<PeqTerm>,
    pub r_max: usize,
}

fn ser_ratio<S: serde::Serializer>(r: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&format!("{}/{}", r.numer(), r.denom()))
}

pub fn ratio_to_f64(r: &Rational) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

fn factorial(n: usize) -> u128 {
    (1..=n as u128).product()
}

/// Closed form for a client set of size `p1` sharing `m` items with the
/// server, objective values uniform over `1..=t`.
pub fn peq_closed_form(p1: usize, m: usize, t: usize) -> PeqResult {
    assert!(1 <= m && m <= p1 && t >= 1, "need 1 <= m <= p1 and t >= 1");
    let r_max = t.min(p1 - m + 1);
    let denom = (t as u128).pow(p1 as u32);
    let terms: Vec<PeqTerm> = (1..=r_max)
        .map(|r| {
            let count = if r == 1 {
                t as u128
            } else {
                let inner: u128 = (r - 1..t).map(|j| binomial(j - 1, r - 2) * (t - j) as u128).sum();
                binomial(p1 - m, r - 1) * factorial(r - 1) * inner
            };
            PeqTerm { r, probability: Rational::new(count, denom), included: m < p1 + 1 - r }
        })
        .collect();
    let value = terms.iter().filter(|t| t.included).fold(Rational::zero(), |acc, t| acc + t.probability);
    PeqResult { value, terms, r_max }
}

/// Canonical instance for `(p1, m)`: alphabet of `p1 + 1` items, client set
/// `x1..x{p1}`, server set `x1..x{m}` plus the extra item `x{p1+1}`.
pub fn peq_fixture(p1: usize, m: usize, n2: usize) -> Result<Scenario> {
    if m == 0 || m > p1 {
        return Err(Error::InvalidScenario(format!("need 1 <= M <= P1, got M = {m}, P1 = {p1}")));
    }
    let k = p1 + 1;
    Scenario::new(
        Alphabet::numbered(k)?,
        FeasibleSet::new(Entity::E1, 0..p1, k)?,
        FeasibleSet::new(Entity::E2, (0..m).chain([p1]), k)?,
        Objective::new(vec![1; k], Sense::Minimize),
        n2,
        None,
        0,
    )
}

/// Exact probability by enumeration: every assignment of `1..=t` to the
/// client's items is simulated, and the runs whose download equals
/// `d_psi(P1, N2)` are counted. Items outside `P1` keep the base value; they
/// cannot influence the client's groups.
pub fn peq_exhaustive(base: &Scenario, t: usize) -> Result<Rational> {
    let p1 = base.set1().len();
    let size = (t as u128).checked_pow(p1 as u32).unwrap_or(u128::MAX);
    if t == 0 || size > EXHAUSTIVE_LIMIT {
        return Err(Error::EnumerationTooLarge { size, limit: EXHAUSTIVE_LIMIT });
    }
    let positions: Vec<usize> = base.set1().indices().iter().copied().collect();
    let target = d_psi(p1, base.n2());
    let template = base.objective().values().to_vec();
    let sense = base.objective().sense();

    let hits = (0..size as u64)
        .into_par_iter()
        .map(|code| -> Result<u64> {
            let mut values = template.clone();
            let mut rest = code;
            for &pos in &positions {
                values[pos] = (rest % t as u64) as u32 + 1;
                rest /= t as u64;
            }
            let s = base.clone().with_objective(Objective::new(values, sense))?;
            let out = optimize_with(&s, false)?;
            Ok((out.transcript.total_download() == target) as u64)
        })
        .try_reduce(|| 0, |a, b| Ok(a + b))?;
    Ok(Rational::new(hits as u128, size))
}
