use serde::Serialize;

/// Download cost of PSI on a client set of size `p1`: `⌈p1·N2/(N2−1)⌉`.
pub fn d_psi(p1: usize, n2: usize) -> usize {
    assert!(n2 >= 2, "at least two databases are required");
    (p1 * n2).div_ceil(n2 - 1)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum CostBranch {
    /// `M_R < α_R`: CarPSI through rank `R`, then FindPSI.
    #[serde(rename = "findpsi-case")]
    FindPsi,
    /// `M_R = α_R`: CarPSI only.
    #[serde(rename = "carpsi-only-case")]
    CarPsiOnly,
    /// Last singleton group accepted without a query.
    #[serde(rename = "skip-case")]
    Skip,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct CostPrediction {
    pub d: usize,
    pub branch: CostBranch,
}

/// Closed-form download cost of the sequential optimizer given the rank `R`
/// at which it stops, `α_R`, `M_R` and whether the last group was skipped.
pub fn predicted_cost(r: usize, alpha_r: usize, m_r: usize, n2: usize, skip: bool) -> CostPrediction {
    if skip {
        CostPrediction { d: d_psi(r - 1, n2), branch: CostBranch::Skip }
    } else if m_r < alpha_r {
        CostPrediction { d: d_psi(r + alpha_r - 1, n2), branch: CostBranch::FindPsi }
    } else {
        CostPrediction { d: d_psi(r, n2), branch: CostBranch::CarPsiOnly }
    }
}

/// Worst-case download cost of threshold PSI with intersection size `m`.
pub fn d_thpsi(m: usize, t: usize, p1: usize, n2: usize) -> usize {
    if m < t || m == p1 {
        2
    } else {
        d_psi(p1, n2)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn d_psi_examples() {
        assert_eq!(d_psi(5, 2), 10);
        assert_eq!(d_psi(5, 3), 8);
        assert_eq!(d_psi(1, 2), 2);
        assert_eq!(d_psi(4, 2), 8);
        assert_eq!(d_psi(0, 4), 0);
    }

    #[test]
    fn predicted_cost_examples() {
        assert_eq!(predicted_cost(1, 3, 2, 2, false), CostPrediction { d: 6, branch: CostBranch::FindPsi });
        for n2 in 2..10 {
            assert_eq!(predicted_cost(1, 1, 1, n2, false).d, 2);
        }
        // R + α_R = P1 + 1 with M_R < α_R reaches the naive cost.
        for (p1, r) in [(5, 1), (5, 3), (7, 2)] {
            let alpha = p1 + 1 - r;
            for n2 in 2..6 {
                assert_eq!(predicted_cost(r, alpha, alpha - 1, n2, false).d, d_psi(p1, n2));
            }
        }
        assert_eq!(predicted_cost(3, 1, 1, 2, true), CostPrediction { d: 4, branch: CostBranch::Skip });
        assert_eq!(predicted_cost(2, 3, 3, 3, false), CostPrediction { d: 3, branch: CostBranch::CarPsiOnly });
    }

    #[test]
    fn d_thpsi_examples() {
        assert_eq!(d_thpsi(4, 5, 5, 2), 2);
        assert_eq!(d_thpsi(3, 2, 5, 2), 10);
        assert_eq!(d_thpsi(5, 1, 5, 3), 2);
        assert_eq!(d_thpsi(0, 1, 5, 3), 2);
    }
}
