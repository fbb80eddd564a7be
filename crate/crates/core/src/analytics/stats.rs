use statrs::distribution::{ChiSquared, ContinuousCDF};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChiSquareTest {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
}

impl ChiSquareTest {
    pub fn passes(&self, significance: f64) -> bool {
        self.p_value >= significance
    }
}

/// Pearson goodness-of-fit test of `counts` against the uniform distribution
/// over its cells.
pub fn chi_square_uniform(counts: &[u64]) -> ChiSquareTest {
    assert!(counts.len() >= 2, "need at least two cells");
    let total: u64 = counts.iter().sum();
    assert!(total > 0, "need at least one observation");
    let expected = total as f64 / counts.len() as f64;
    let statistic = counts
        .iter()
        .map(|&c| {
            let d = c as f64 - expected;
            d * d / expected
        })
        .sum();
    let dof = counts.len() - 1;
    let dist = ChiSquared::new(dof as f64).expect("dof is positive");
    ChiSquareTest { statistic, dof, p_value: dist.sf(statistic) }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfectly_uniform_counts() {
        let t = chi_square_uniform(&[100, 100, 100, 100, 100]);
        assert_eq!(t.statistic, 0.0);
        assert_eq!(t.dof, 4);
        assert!((t.p_value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn skewed_counts_fail() {
        let t = chi_square_uniform(&[300, 100, 100, 100, 100]);
        // expected 140 per cell: (160² + 4·40²) / 140
        assert!((t.statistic - 32000.0 / 140.0).abs() < 1e-9);
        assert!(!t.passes(0.01));
    }

    #[test]
    fn critical_value_at_one_percent() {
        // 13.2767 is the 0.99 quantile of chi-square with 4 degrees of freedom.
        let dist = ChiSquared::new(4.0).unwrap();
        assert!((dist.sf(13.2767) - 0.01).abs() < 1e-5);
    }
}
