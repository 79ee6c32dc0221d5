//! Closed-form approximation guarantees reported next to realized ratios.

use num_rational::BigRational;
use num_traits::Zero;

use crate::instance::CostMode;
use crate::numeric::harmonic;

/// Degree bound for stage `ℓ` of the sequential algorithm: `2ℓ − 1` when the
/// demands form a star centered at the candidate center, `(4ℓ − 3)²` otherwise.
pub fn stage_degree(stage: u64, rooted: bool) -> u64 {
    assert!(stage >= 1, "stages are numbered from 1");
    if rooted {
        2 * stage - 1
    } else {
        (4 * stage - 3).pow(2)
    }
}

/// Degree bound on the minimal members of a family with largest boundary
/// `gamma`: `2γ + 1` for the rooted family, `(4γ + 1)²` in general.
pub fn family_degree_bound(gamma: u64, rooted: bool) -> u64 {
    if rooted {
        2 * gamma + 1
    } else {
        (4 * gamma + 1).pow(2)
    }
}

/// Ratio of the sequential `k`-stage algorithm.
///
/// Edge costs: `Σ_ℓ H(Δ_ℓ) / (k − ℓ + 1)`.
/// Node costs: `Σ_ℓ H(Δ_ℓ) · min(p_max / (k − ℓ + 1), 1)`.
pub fn sequential_bound(k: u64, rooted: bool, mode: CostMode, p_max: u64) -> BigRational {
    let mut total = BigRational::zero();
    for stage in 1..=k {
        let h = harmonic(stage_degree(stage, rooted));
        let remaining = k - stage + 1;
        let factor = match mode {
            CostMode::Edge => BigRational::new(1.into(), remaining.into()),
            CostMode::Node => {
                if p_max >= remaining {
                    BigRational::from_integer(1.into())
                } else {
                    BigRational::new(p_max.into(), remaining.into())
                }
            }
        };
        total += h * factor;
    }
    total
}
