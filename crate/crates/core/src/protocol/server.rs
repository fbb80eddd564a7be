use rand::Rng;

use crate::error::{Error, Result};
use crate::field::{FieldElement, FieldVector, Prime};

/// Number of shared randomness symbols the server prepares, `⌈P1/(N2−1)⌉`.
pub fn randomness_supply(p1: usize, n2: usize) -> usize {
    assert!(n2 >= 2, "at least two databases are required");
    p1.div_ceil(n2 - 1)
}

/// Symbols `S_1..S_m` shared by all server databases before any query
/// arrives.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommonRandomness {
    symbols: Vec<FieldElement>,
}

impl CommonRandomness {
    pub fn sample<R: Rng + ?Sized>(rng: &mut R, modulus: Prime, count: usize) -> Self {
        CommonRandomness { symbols: (0..count).map(|_| FieldElement::sample(rng, modulus)).collect() }
    }

    /// The standard supply for a client set of size `p1`.
    pub fn for_sets<R: Rng + ?Sized>(rng: &mut R, modulus: Prime, p1: usize, n2: usize) -> Self {
        Self::sample(rng, modulus, randomness_supply(p1, n2))
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn symbols(&self) -> &[FieldElement] {
        &self.symbols
    }

    /// `S_k` for a 1-based round index.
    pub fn symbol(&self, k: usize) -> Result<FieldElement> {
        k.checked_sub(1)
            .and_then(|i| self.symbols.get(i))
            .copied()
            .ok_or(Error::RandomnessExhausted { round: k, supply: self.symbols.len() })
    }
}

/// Everything the server side holds: the replicated incidence vector and the
/// common randomness. Individual databases only ever see a read-only view.
#[derive(Debug, Clone)]
pub struct ServerState {
    x2: FieldVector,
    randomness: CommonRandomness,
    n2: usize,
}

impl ServerState {
    pub fn new(x2: FieldVector, randomness: CommonRandomness, n2: usize) -> Self {
        ServerState { x2, randomness, n2 }
    }

    pub fn x2(&self) -> &FieldVector {
        &self.x2
    }

    pub fn randomness(&self) -> &CommonRandomness {
        &self.randomness
    }

    pub fn n2(&self) -> usize {
        self.n2
    }

    /// Database `id` in `1..=N2`.
    pub fn database(&self, id: usize) -> Result<Database<'_>> {
        if id == 0 || id > self.n2 {
            return Err(Error::UnknownDatabase { db: id, n2: self.n2 });
        }
        Ok(Database { id, x2: &self.x2, randomness: &self.randomness })
    }
}

/// One server replica. It answers each query from the query itself, its copy
/// of `X_2` and the shared symbols, and keeps no record of what it was asked.
#[derive(Debug, Clone, Copy)]
pub struct Database<'a> {
    id: usize,
    x2: &'a FieldVector,
    randomness: &'a CommonRandomness,
}

impl Database<'_> {
    pub fn id(&self) -> usize {
        self.id
    }

    /// `Qᵀ X_2 + S_k`.
    pub fn answer(&self, query: &FieldVector, round: usize) -> Result<FieldElement> {
        query.dot(self.x2)?.add(self.randomness.symbol(round)?)
    }
}

pub fn database_answer(query: &FieldVector, state: &ServerState, round: usize, db: usize) -> Result<FieldElement> {
    state.database(db)?.answer(query, round)
}
