//! Closed-form predictions and exact accounting that the simulator is checked
//! against: download costs, the probability that the scheme costs as much as
//! naive PSI, and leakage partitions.

mod cost;
mod leakage;
mod peq;
mod stats;

pub use cost::{d_psi, d_thpsi, predicted_cost, CostBranch, CostPrediction};
pub use leakage::{
    admissible_server_sets, leakage_partitions, mutual_information_bits, LeakageBits, LeakagePartition, LeakageReport,
    LEAKAGE_MAX_K,
};
pub use peq::{
    peq_closed_form, peq_exhaustive, peq_fixture, ratio_to_f64, PeqResult, PeqTerm, Rational, EXHAUSTIVE_LIMIT,
};
pub use stats::{chi_square_uniform, ChiSquareTest};
