use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{Alphabet, Entity, FeasibleSet, Objective, Sense};
use crate::error::{Error, Result};
use crate::field::Prime;

/// One problem instance: both feasible sets, the objective, the server's
/// database count and the field the protocols run over.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Scenario {
    alphabet: Alphabet,
    set1: FeasibleSet,
    set2: FeasibleSet,
    objective: Objective,
    n2: usize,
    n1: Option<usize>,
    prime: Prime,
    seed: u64,
}

impl Scenario {
    /// Validates every model invariant, including `K < P1 + P2`. When
    /// `prime` is `None` the smallest prime above `P1` is used.
    pub fn new(
        alphabet: Alphabet,
        set1: FeasibleSet,
        set2: FeasibleSet,
        objective: Objective,
        n2: usize,
        prime: Option<Prime>,
        seed: u64,
    ) -> Result<Self> {
        let s = Self::new_relaxed(alphabet, set1, set2, objective, n2, prime, seed)?;
        if s.alphabet.len() >= s.set1.len() + s.set2.len() {
            return Err(Error::InvalidScenario(format!(
                "K = {} must be smaller than P1 + P2 = {}",
                s.alphabet.len(),
                s.set1.len() + s.set2.len()
            )));
        }
        Ok(s)
    }

    /// Like [`Scenario::new`] but without the `K < P1 + P2` condition, so
    /// instances with an empty intersection can be built to exercise the
    /// model-violation paths.
    pub fn new_relaxed(
        alphabet: Alphabet,
        set1: FeasibleSet,
        set2: FeasibleSet,
        objective: Objective,
        n2: usize,
        prime: Option<Prime>,
        seed: u64,
    ) -> Result<Self> {
        let k = alphabet.len();
        if set1.owner() != Entity::E1 || set2.owner() != Entity::E2 {
            return Err(Error::InvalidScenario("set1 must belong to E1 and set2 to E2".into()));
        }
        for s in [&set1, &set2] {
            if let Some(&index) = s.indices().iter().find(|&&i| i >= k) {
                return Err(Error::IndexOutOfRange { index, size: k });
            }
        }
        if objective.len() != k {
            return Err(Error::InvalidScenario(format!(
                "objective has {} values for an alphabet of {k}",
                objective.len()
            )));
        }
        if n2 < 2 {
            return Err(Error::InvalidScenario(format!("N2 = {n2}, at least 2 databases are required")));
        }
        let p1 = set1.len() as u64;
        let prime = prime.unwrap_or_else(|| Prime::smallest_above(p1));
        if prime.get() <= p1 {
            return Err(Error::InvalidScenario(format!("q = {prime} must exceed P1 = {p1}")));
        }
        Ok(Scenario { alphabet, set1, set2, objective, n2, n1: None, prime, seed })
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn k(&self) -> usize {
        self.alphabet.len()
    }

    pub fn set1(&self) -> &FeasibleSet {
        &self.set1
    }

    pub fn set2(&self) -> &FeasibleSet {
        &self.set2
    }

    pub fn objective(&self) -> &Objective {
        &self.objective
    }

    pub fn n2(&self) -> usize {
        self.n2
    }

    /// Client-side database count. Recorded only; no protocol uses it.
    pub fn n1(&self) -> Option<usize> {
        self.n1
    }

    pub fn prime(&self) -> Prime {
        self.prime
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn with_n1(mut self, n1: Option<usize>) -> Self {
        self.n1 = n1;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    /// Same instance with a different database count.
    pub fn with_n2(self, n2: usize) -> Result<Self> {
        let n1 = self.n1;
        let relaxed = self.k() >= self.set1.len() + self.set2.len();
        let build = if relaxed { Self::new_relaxed } else { Self::new };
        Ok(build(self.alphabet, self.set1, self.set2, self.objective, n2, Some(self.prime), self.seed)?.with_n1(n1))
    }

    /// Same instance with a different objective.
    pub fn with_objective(mut self, objective: Objective) -> Result<Self> {
        if objective.len() != self.k() {
            return Err(Error::InvalidScenario("objective length differs from K".into()));
        }
        self.objective = objective;
        Ok(self)
    }

    /// Same instance with a different server set of the same size `P2`.
    pub fn with_set2(mut self, set2: FeasibleSet) -> Result<Self> {
        if set2.owner() != Entity::E2 || set2.len() != self.set2.len() {
            return Err(Error::InvalidScenario("replacement set2 must keep owner and size".into()));
        }
        if let Some(&index) = set2.indices().iter().find(|&&i| i >= self.k()) {
            return Err(Error::IndexOutOfRange { index, size: self.k() });
        }
        self.set2 = set2;
        Ok(self)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: ScenarioFile = serde_json::from_str(text).map_err(|e| Error::InvalidScenario(e.to_string()))?;
        file.into_scenario()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&ScenarioFile::from(self)).expect("scenario serializes")
    }
}

/// On-disk form of a [`Scenario`]. Sets and objective keys are item labels.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub alphabet: Vec<String>,
    pub set1: Vec<String>,
    pub set2: Vec<String>,
    pub objective: ObjectiveFile,
    pub n2: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n1: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<u64>,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObjectiveFile {
    pub sense: Sense,
    pub values: BTreeMap<String, u32>,
}

impl ScenarioFile {
    pub fn into_scenario(self) -> Result<Scenario> {
        let alphabet = Alphabet::new(self.alphabet)?;
        let set1 = FeasibleSet::from_labels(Entity::E1, &self.set1, &alphabet)?;
        let set2 = FeasibleSet::from_labels(Entity::E2, &self.set2, &alphabet)?;
        if let Some(unknown) = self.objective.values.keys().find(|l| alphabet.index_of(l).is_none()) {
            return Err(Error::InvalidScenario(format!("objective names unknown label {unknown:?}")));
        }
        let values = alphabet
            .labels()
            .iter()
            .map(|l| {
                self.objective
                    .values
                    .get(l)
                    .copied()
                    .ok_or_else(|| Error::InvalidScenario(format!("no objective value for {l:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        let prime = self.q.map(Prime::new).transpose()?;
        Ok(Scenario::new(
            alphabet,
            set1,
            set2,
            Objective::new(values, self.objective.sense),
            self.n2,
            prime,
            self.seed,
        )?
        .with_n1(self.n1))
    }
}

impl From<&Scenario> for ScenarioFile {
    fn from(s: &Scenario) -> Self {
        let labels = |set: &FeasibleSet| set.indices().iter().map(|&i| s.alphabet.labels()[i].clone()).collect();
        ScenarioFile {
            alphabet: s.alphabet.labels().to_vec(),
            set1: labels(&s.set1),
            set2: labels(&s.set2),
            objective: ObjectiveFile {
                sense: s.objective.sense(),
                values: s.alphabet.labels().iter().cloned().zip(s.objective.values().iter().copied()).collect(),
            },
            n2: s.n2,
            n1: s.n1,
            q: Some(s.prime.get()),
            seed: s.seed,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn movie_fixture_parses() {
        let s = fixtures::movies();
        assert_eq!(s.k(), 8);
        assert_eq!(s.set1().len(), 4);
        assert_eq!(s.set2().len(), 5);
        assert_eq!(s.objective().sense(), Sense::Maximize);
        assert!(s.prime().get() > 4);
    }

    #[test]
    fn json_roundtrip() {
        let s = fixtures::movies().with_n1(Some(3));
        assert_eq!(Scenario::from_json(&s.to_json()).unwrap(), s);
    }

    #[test]
    fn default_prime_is_smallest_above_p1() {
        let text = r#"{"alphabet":["A","B","C"],"set1":["A","B"],"set2":["B","C"],
            "objective":{"sense":"min","values":{"A":1,"B":2,"C":3}},"n2":2}"#;
        let s = Scenario::from_json(text).unwrap();
        assert_eq!(s.prime().get(), 3);
        assert_eq!(s.seed(), 0);
        assert_eq!(s.n1(), None);
    }

    #[test]
    fn invalid_scenarios_are_rejected() {
        let base = |patch: &str| {
            format!(
                r#"{{"alphabet":["A","B","C"],"set1":["A","B"],"set2":["B","C"],
                "objective":{{"sense":"min","values":{{"A":1,"B":2,"C":3}}}}{patch}}}"#
            )
        };
        // N2 below two.
        assert!(Scenario::from_json(&base(r#","n2":1"#)).is_err());
        // q not prime, and q not above P1.
        assert!(Scenario::from_json(&base(r#","n2":2,"q":4"#)).is_err());
        assert!(Scenario::from_json(&base(r#","n2":2,"q":2"#)).is_err());
        // K >= P1 + P2.
        let text = r#"{"alphabet":["A","B","C","D"],"set1":["A","B"],"set2":["C","D"],
            "objective":{"sense":"min","values":{"A":1,"B":2,"C":3,"D":1}},"n2":2}"#;
        assert!(matches!(Scenario::from_json(text), Err(Error::InvalidScenario(_))));
        // Unknown label and missing objective value.
        let text = r#"{"alphabet":["A","B","C"],"set1":["A","Z"],"set2":["B","C"],
            "objective":{"sense":"min","values":{"A":1,"B":2,"C":3}},"n2":2}"#;
        assert!(Scenario::from_json(text).is_err());
        let text = r#"{"alphabet":["A","B","C"],"set1":["A","B"],"set2":["B","C"],
            "objective":{"sense":"min","values":{"A":1,"B":2}},"n2":2}"#;
        assert!(Scenario::from_json(text).is_err());
        assert!(Scenario::from_json("not json").is_err());
    }
}
