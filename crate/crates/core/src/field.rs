//! Arithmetic over a prime field `F_q` and fixed-length vectors of field
//! elements. Every value is kept as a canonical residue in `[0, q)`.

use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Prime modulus `q`. Limited to 32 bits so products of two residues fit
/// in a `u64`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "u64", into = "u64")]
pub struct Prime(u64);

impl Prime {
    pub const MAX: u64 = u32::MAX as u64;

    pub fn new(q: u64) -> Result<Self> {
        if q > Self::MAX || !is_prime(q) {
            return Err(Error::NotPrime(q));
        }
        Ok(Prime(q))
    }

    /// Smallest prime strictly greater than `n`.
    pub fn smallest_above(n: u64) -> Self {
        let mut candidate = n + 1;
        while !is_prime(candidate) {
            candidate += 1;
        }
        Prime(candidate)
    }

    pub fn get(self) -> u64 {
        self.0
    }
}

impl TryFrom<u64> for Prime {
    type Error = Error;

    fn try_from(q: u64) -> Result<Self> {
        Prime::new(q)
    }
}

impl From<Prime> for u64 {
    fn from(p: Prime) -> u64 {
        p.0
    }
}

impl fmt::Display for Prime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n.is_multiple_of(2) {
        return n == 2;
    }
    let mut d = 3;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 2;
    }
    true
}

fn check_modulus(a: Prime, b: Prime) -> Result<()> {
    if a != b {
        return Err(Error::ModulusMismatch { left: a.0, right: b.0 });
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FieldElement {
    value: u64,
    modulus: Prime,
}

#[allow(clippy::should_implement_trait)]
impl FieldElement {
    /// Reduces `value` modulo `q`.
    pub fn new(value: u64, modulus: Prime) -> Self {
        FieldElement { value: value % modulus.0, modulus }
    }

    pub fn zero(modulus: Prime) -> Self {
        FieldElement { value: 0, modulus }
    }

    pub fn one(modulus: Prime) -> Self {
        FieldElement::new(1, modulus)
    }

    pub fn value(self) -> u64 {
        self.value
    }

    pub fn modulus(self) -> Prime {
        self.modulus
    }

    pub fn add(self, other: FieldElement) -> Result<FieldElement> {
        check_modulus(self.modulus, other.modulus)?;
        Ok(FieldElement::new(self.value + other.value, self.modulus))
    }

    pub fn sub(self, other: FieldElement) -> Result<FieldElement> {
        check_modulus(self.modulus, other.modulus)?;
        Ok(FieldElement::new(self.value + self.modulus.0 - other.value, self.modulus))
    }

    pub fn mul(self, other: FieldElement) -> Result<FieldElement> {
        check_modulus(self.modulus, other.modulus)?;
        Ok(FieldElement::new(self.value * other.value, self.modulus))
    }

    /// Uniform element of `F_q`.
    pub fn sample<R: Rng + ?Sized>(rng: &mut R, modulus: Prime) -> Self {
        FieldElement { value: rng.random_range(0..modulus.0), modulus }
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)
    }
}

/// A length-`K` vector over `F_q`: masks `h_k`, basis vectors `e_j`, group
/// indicators and the queries built from them.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FieldVector {
    elements: Vec<u64>,
    modulus: Prime,
}

impl FieldVector {
    pub fn zeros(modulus: Prime, len: usize) -> Self {
        FieldVector { elements: vec![0; len], modulus }
    }

    pub fn from_residues(modulus: Prime, residues: impl IntoIterator<Item = u64>) -> Self {
        FieldVector { elements: residues.into_iter().map(|v| v % modulus.0).collect(), modulus }
    }

    /// Standard basis vector `e_j` (0-based `j`).
    pub fn basis(modulus: Prime, len: usize, j: usize) -> Result<Self> {
        Self::indicator(modulus, len, [j])
    }

    /// 0/1 vector with ones exactly at `indices`.
    pub fn indicator(modulus: Prime, len: usize, indices: impl IntoIterator<Item = usize>) -> Result<Self> {
        let mut v = Self::zeros(modulus, len);
        for j in indices {
            if j >= len {
                return Err(Error::IndexOutOfRange { index: j, size: len });
            }
            v.elements[j] = 1;
        }
        Ok(v)
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn modulus(&self) -> Prime {
        self.modulus
    }

    pub fn residues(&self) -> &[u64] {
        &self.elements
    }

    pub fn get(&self, i: usize) -> Option<FieldElement> {
        self.elements.get(i).map(|&value| FieldElement { value, modulus: self.modulus })
    }

    pub fn is_zero(&self) -> bool {
        self.elements.iter().all(|&v| v == 0)
    }

    fn check_compatible(&self, other: &FieldVector) -> Result<()> {
        check_modulus(self.modulus, other.modulus)?;
        if self.len() != other.len() {
            return Err(Error::LengthMismatch { left: self.len(), right: other.len() });
        }
        Ok(())
    }

    pub fn add(&self, other: &FieldVector) -> Result<FieldVector> {
        self.check_compatible(other)?;
        let q = self.modulus.0;
        Ok(FieldVector {
            elements: self.elements.iter().zip(&other.elements).map(|(a, b)| (a + b) % q).collect(),
            modulus: self.modulus,
        })
    }

    pub fn sub(&self, other: &FieldVector) -> Result<FieldVector> {
        self.check_compatible(other)?;
        let q = self.modulus.0;
        Ok(FieldVector {
            elements: self.elements.iter().zip(&other.elements).map(|(a, b)| (a + q - b) % q).collect(),
            modulus: self.modulus,
        })
    }

    pub fn dot(&self, other: &FieldVector) -> Result<FieldElement> {
        self.check_compatible(other)?;
        let q = self.modulus.0;
        let acc = self.elements.iter().zip(&other.elements).fold(0u64, |acc, (a, b)| (acc + a * b % q) % q);
        Ok(FieldElement { value: acc, modulus: self.modulus })
    }
}

/// Vector of `len` independent uniform elements of `F_q`, drawn in
/// coordinate order, so the output is a pure function of the stream state.
pub fn sample_uniform_vector<R: Rng + ?Sized>(rng: &mut R, modulus: Prime, len: usize) -> FieldVector {
    FieldVector { elements: (0..len).map(|_| rng.random_range(0..modulus.0)).collect(), modulus }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn p(q: u64) -> Prime {
        Prime::new(q).unwrap()
    }

    fn el(v: u64, q: u64) -> FieldElement {
        FieldElement::new(v, p(q))
    }

    #[test]
    fn prime_validation() {
        assert!(Prime::new(11).is_ok());
        assert!(Prime::new(2).is_ok());
        assert_eq!(Prime::new(1), Err(Error::NotPrime(1)));
        assert_eq!(Prime::new(9), Err(Error::NotPrime(9)));
        assert!(Prime::new(Prime::MAX + 2).is_err());
        assert_eq!(Prime::smallest_above(4).get(), 5);
        assert_eq!(Prime::smallest_above(5).get(), 7);
        assert_eq!(Prime::smallest_above(1).get(), 2);
    }

    #[test]
    fn add_examples() {
        assert_eq!(el(7, 11).add(el(8, 11)).unwrap().value(), 4);
        assert_eq!(el(0, 11).add(el(5, 11)).unwrap().value(), 5);
        assert_eq!(el(4, 5).add(el(4, 5)).unwrap().value(), 3);
    }

    #[test]
    fn sub_examples() {
        assert_eq!(el(3, 11).sub(el(7, 11)).unwrap().value(), 7);
        assert_eq!(el(9, 11).sub(el(9, 11)).unwrap().value(), 0);
        assert_eq!(el(1, 5).sub(el(3, 5)).unwrap().value(), 3);
    }

    #[test]
    fn modulus_mismatch_is_rejected() {
        assert_eq!(el(1, 5).add(el(1, 7)), Err(Error::ModulusMismatch { left: 5, right: 7 }));
        assert!(el(1, 5).sub(el(1, 7)).is_err());
        let a = FieldVector::zeros(p(5), 3);
        let b = FieldVector::zeros(p(7), 3);
        assert!(a.dot(&b).is_err());
    }

    #[test]
    fn dot_examples() {
        let q = p(11);
        let zero = FieldVector::zeros(q, 8);
        let any = FieldVector::from_residues(q, [3, 1, 4, 1, 5, 9, 2, 6]);
        assert_eq!(zero.dot(&any).unwrap().value(), 0);

        // X_2 of the movie example; C is the third item.
        let x2 = FieldVector::from_residues(q, [0, 1, 1, 1, 0, 0, 1, 1]);
        let e3 = FieldVector::basis(q, 8, 2).unwrap();
        assert_eq!(e3.dot(&x2).unwrap().value(), 1);

        let a = FieldVector::from_residues(p(5), [1, 2]);
        let b = FieldVector::from_residues(p(5), [3, 4]);
        assert_eq!(a.dot(&b).unwrap().value(), 1);
    }

    #[test]
    fn dot_length_mismatch() {
        let a = FieldVector::zeros(p(5), 3);
        let b = FieldVector::zeros(p(5), 4);
        assert_eq!(a.dot(&b), Err(Error::LengthMismatch { left: 3, right: 4 }));
    }

    #[test]
    fn indicator_out_of_range() {
        assert!(FieldVector::indicator(p(5), 3, [3]).is_err());
    }

    #[test]
    fn sampling_is_reproducible() {
        let q = p(11);
        let a = sample_uniform_vector(&mut ChaCha8Rng::seed_from_u64(7), q, 8);
        let b = sample_uniform_vector(&mut ChaCha8Rng::seed_from_u64(7), q, 8);
        assert_eq!(a, b);
        assert_eq!(a.len(), 8);
        assert!(a.residues().iter().all(|&v| v < 11));
        let single = sample_uniform_vector(&mut ChaCha8Rng::seed_from_u64(7), q, 1);
        assert_eq!(single.len(), 1);
    }

    #[test]
    fn sampling_frequencies_are_uniform() {
        let q = p(5);
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let draws = 100_000;
        let mut counts = [0u64; 5];
        for _ in 0..draws {
            counts[sample_uniform_vector(&mut rng, q, 1).residues()[0] as usize] += 1;
        }
        for c in counts {
            let freq = c as f64 / draws as f64;
            assert!((0.19..=0.21).contains(&freq), "frequency {freq}");
        }
    }

    proptest! {
        #[test]
        fn add_then_sub_roundtrips(a in 0u64..101, b in 0u64..101) {
            let q = p(101);
            let (a, b) = (FieldElement::new(a, q), FieldElement::new(b, q));
            prop_assert_eq!(a.add(b).unwrap().sub(b).unwrap(), a);
        }

        #[test]
        fn dot_is_bilinear(
            a in proptest::collection::vec(0u64..13, 6),
            b in proptest::collection::vec(0u64..13, 6),
            c in proptest::collection::vec(0u64..13, 6),
        ) {
            let q = p(13);
            let (a, b, c) = (
                FieldVector::from_residues(q, a),
                FieldVector::from_residues(q, b),
                FieldVector::from_residues(q, c),
            );
            let lhs = a.add(&c).unwrap().dot(&b).unwrap();
            let rhs = a.dot(&b).unwrap().add(c.dot(&b).unwrap()).unwrap();
            prop_assert_eq!(lhs, rhs);
        }
    }
}
