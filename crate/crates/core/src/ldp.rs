//! Exact `(ε, δ)`-LDP auditing of finite mechanisms.
//!
//! A kernel is `(ε, δ)`-LDP exactly when `η_{e^ε}(K) ≤ δ`, so the tightest
//! `δ` at a given `ε` is the two-point `E_{e^ε}` contraction coefficient and
//! the privacy profile `ε ↦ δ(ε)` is read off without any sampling.

use serde::{Deserialize, Serialize};

use crate::contraction::{eta_gamma_two_point, PrivacyParams};
use crate::dist::{egamma, Distribution};
use crate::error::{Error, Result};
use crate::kernel::{pushforward, Kernel};
use crate::oracle::{dirichlet, seeded_rng};

/// Slack allowed when comparing a computed `δ` against a target.
pub const LDP_TOLERANCE: f64 = 1e-12;

/// Additive slack of the sampled contraction check in [`verify_equivalence`].
pub const VERIFY_TOLERANCE: f64 = 1e-10;

/// Upper end of the `ε` search in [`tightest_epsilon`].
pub const DEFAULT_EPSILON_MAX: f64 = 50.0;

/// Bisection stops once the bracket is narrower than this.
pub const EPSILON_TOLERANCE: f64 = 1e-9;

/// Default seed for the random pairs drawn by [`verify_equivalence`].
pub const DEFAULT_SEED: u64 = 20_210_415;

/// Smallest `δ` such that `k` is `(ε, δ)`-LDP.
pub fn delta_at(k: &Kernel, epsilon: f64) -> Result<f64> {
    if !(epsilon >= 0.0) {
        return Err(Error::domain("epsilon", epsilon, "must be >= 0"));
    }
    Ok(eta_gamma_two_point(k, epsilon.exp())?.eta_gamma)
}

pub fn is_ldp(k: &Kernel, params: PrivacyParams) -> Result<bool> {
    Ok(delta_at(k, params.epsilon())? <= params.delta() + LDP_TOLERANCE)
}

/// `lim_{ε→∞} δ(ε)`: the largest mass one row puts where another row is zero.
pub fn residual_delta(k: &Kernel) -> f64 {
    let mut best: f64 = 0.0;
    for a in k.rows() {
        for b in k.rows() {
            let mass: f64 = a
                .probs()
                .iter()
                .zip(b.probs())
                .filter(|(_, q)| **q == 0.0)
                .map(|(p, _)| *p)
                .sum();
            best = best.max(mass);
        }
    }
    best
}

/// Outcome of [`tightest_epsilon`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpsilonSearch {
    /// Smallest `ε` (to within [`EPSILON_TOLERANCE`]) meeting the target, or
    /// `+∞` when no finite `ε` can.
    pub epsilon: f64,
    /// The target is reachable in the limit but not by `ε_max`; `epsilon`
    /// then holds `ε_max`.
    pub saturated: bool,
}

pub fn tightest_epsilon(k: &Kernel, delta: f64) -> Result<EpsilonSearch> {
    tightest_epsilon_with_max(k, delta, DEFAULT_EPSILON_MAX)
}

/// Bisection on `ε ∈ [0, epsilon_max]` for the smallest `ε` with
/// `δ(ε) ≤ delta`.
pub fn tightest_epsilon_with_max(k: &Kernel, delta: f64, epsilon_max: f64) -> Result<EpsilonSearch> {
    if !(0.0..=1.0).contains(&delta) {
        return Err(Error::domain("delta", delta, "must lie in [0, 1]"));
    }
    if !(epsilon_max > 0.0) || !epsilon_max.is_finite() {
        return Err(Error::domain("epsilon_max", epsilon_max, "must be finite and > 0"));
    }
    let meets = |eps: f64| -> Result<bool> { Ok(delta_at(k, eps)? <= delta + LDP_TOLERANCE) };
    if meets(0.0)? {
        return Ok(EpsilonSearch {
            epsilon: 0.0,
            saturated: false,
        });
    }
    if residual_delta(k) > delta + LDP_TOLERANCE {
        return Ok(EpsilonSearch {
            epsilon: f64::INFINITY,
            saturated: false,
        });
    }
    if !meets(epsilon_max)? {
        return Ok(EpsilonSearch {
            epsilon: epsilon_max,
            saturated: true,
        });
    }
    let (mut lo, mut hi) = (0.0, epsilon_max);
    while hi - lo > EPSILON_TOLERANCE {
        let mid = 0.5 * (lo + hi);
        if meets(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(EpsilonSearch {
        epsilon: hi,
        saturated: false,
    })
}

/// Sampled privacy profile `ε ↦ δ(ε)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrivacyProfile {
    pub kernel_id: String,
    pub points: Vec<(f64, f64)>,
}

impl PrivacyProfile {
    /// Evaluate `δ(ε)` on a strictly increasing grid of `ε ≥ 0`.
    pub fn compute(k: &Kernel, kernel_id: impl Into<String>, epsilons: &[f64]) -> Result<Self> {
        if epsilons.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::domain("epsilon grid", f64::NAN, "must be strictly increasing"));
        }
        let points = epsilons
            .iter()
            .map(|&e| delta_at(k, e).map(|d| (e, d)))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            kernel_id: kernel_id.into(),
            points,
        })
    }

    /// `epsilon,delta` CSV with header.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("epsilon,delta\n");
        for (e, d) in &self.points {
            out.push_str(&crate::fmt::csv_record(&[*e, *d]));
            out.push('\n');
        }
        out
    }
}

/// Where a checked input pair came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PairSource {
    PointMass { x: usize, x_prime: usize },
    Random { trial: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairWitness {
    pub source: PairSource,
    pub p: Distribution,
    pub q: Distribution,
    /// `E_γ(PK‖QK)`.
    pub output_divergence: f64,
    /// `E_γ(P‖Q)`.
    pub input_divergence: f64,
}

/// Result of checking `E_γ(PK‖QK) ≤ δ E_γ(P‖Q)` on sampled pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceReport {
    pub epsilon: f64,
    pub delta: f64,
    pub delta_tight: f64,
    pub certified: bool,
    pub pairs_checked: usize,
    /// Largest `E_γ(PK‖QK) / E_γ(P‖Q)` over pairs with a non-negligible
    /// denominator.
    pub max_ratio: f64,
    pub max_ratio_witness: Option<PairWitness>,
    pub violations: usize,
    pub first_violation: Option<PairWitness>,
    /// First point-mass pair whose output divergence exceeds `δ`.
    pub point_mass_violation: Option<(usize, usize)>,
}

impl EquivalenceReport {
    /// Both directions of the equivalence hold on the checked pairs: a
    /// certified kernel shows no violation and an uncertified one is
    /// refuted by a point-mass pair.
    pub fn consistent(&self) -> bool {
        if self.certified {
            self.violations == 0
        } else {
            self.point_mass_violation.is_some()
        }
    }
}

/// Check the contraction form of `(ε, δ)`-LDP on `trials` Dirichlet(1)
/// pairs plus every ordered pair of distinct point masses.
pub fn verify_equivalence(
    k: &Kernel,
    params: PrivacyParams,
    trials: usize,
    seed: u64,
) -> Result<EquivalenceReport> {
    if trials == 0 {
        return Err(Error::domain("trials", 0.0, "must be >= 1"));
    }
    let gamma = params.gamma();
    let delta = params.delta();
    let delta_tight = delta_at(k, params.epsilon())?;
    let mut report = EquivalenceReport {
        epsilon: params.epsilon(),
        delta,
        delta_tight,
        certified: delta_tight <= delta + LDP_TOLERANCE,
        pairs_checked: 0,
        max_ratio: 0.0,
        max_ratio_witness: None,
        violations: 0,
        first_violation: None,
        point_mass_violation: None,
    };

    let mut check = |source: PairSource, p: Distribution, q: Distribution| -> Result<()> {
        let input_divergence = egamma(&p, &q, gamma)?;
        let output_divergence = egamma(&pushforward(&p, k)?, &pushforward(&q, k)?, gamma)?;
        report.pairs_checked += 1;
        let witness = || PairWitness {
            source,
            p: p.clone(),
            q: q.clone(),
            output_divergence,
            input_divergence,
        };
        if input_divergence > crate::oracle::MIN_DENOMINATOR {
            let ratio = output_divergence / input_divergence;
            if ratio > report.max_ratio {
                report.max_ratio = ratio;
                report.max_ratio_witness = Some(witness());
            }
        }
        if output_divergence > delta * input_divergence + VERIFY_TOLERANCE {
            report.violations += 1;
            if report.first_violation.is_none() {
                report.first_violation = Some(witness());
            }
        }
        if let PairSource::PointMass { x, x_prime } = source {
            if report.point_mass_violation.is_none() && output_divergence > delta + LDP_TOLERANCE {
                report.point_mass_violation = Some((x, x_prime));
            }
        }
        Ok(())
    };

    let size = k.input_size();
    for x in 0..size {
        for x_prime in 0..size {
            if x != x_prime {
                check(
                    PairSource::PointMass { x, x_prime },
                    Distribution::point_mass(size, x)?,
                    Distribution::point_mass(size, x_prime)?,
                )?;
            }
        }
    }
    let mut rng = seeded_rng(seed);
    for trial in 0..trials {
        let p = dirichlet(&mut rng, size, 1.0)?;
        let q = dirichlet(&mut rng, size, 1.0)?;
        check(PairSource::Random { trial }, p, q)?;
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contraction::eta_tv_dobrushin;
    use crate::kernel::{bsc, k_rr, randomized_response};
    use approx::assert_abs_diff_eq;

    fn params(e: f64, d: f64) -> PrivacyParams {
        PrivacyParams::new(e, d).unwrap()
    }

    #[test]
    fn delta_at_examples() {
        for eps in [0.5, 1.0, 2.0] {
            assert!(delta_at(&randomized_response(eps).unwrap(), eps).unwrap() <= 1e-15);
        }
        let id = Kernel::identity(3).unwrap();
        for eps in [0.0, 1.0, 20.0] {
            assert_eq!(delta_at(&id, eps).unwrap(), 1.0);
        }
        assert_eq!(delta_at(&bsc(0.5).unwrap(), 0.0).unwrap(), 0.0);
        let e = 1f64.exp();
        let expected = e / (1.0 + e) - 0.5f64.exp() / (1.0 + e);
        assert_abs_diff_eq!(delta_at(&randomized_response(1.0).unwrap(), 0.5).unwrap(), expected, epsilon = 1e-15);
        assert_abs_diff_eq!(expected, 0.2877, epsilon = 1e-4);
        assert!(delta_at(&id, -1.0).is_err());
    }

    #[test]
    fn is_ldp_examples() {
        let rr = randomized_response(1.0).unwrap();
        assert!(is_ldp(&rr, params(1.0, 0.0)).unwrap());
        assert!(!is_ldp(&rr, params(0.9, 0.0)).unwrap());
        assert!(delta_at(&rr, 0.9).unwrap() > 1e-3);
        for k in [Kernel::identity(4).unwrap(), bsc(0.1).unwrap(), rr] {
            assert!(is_ldp(&k, params(0.3, 1.0)).unwrap());
        }
    }

    #[test]
    fn tightest_epsilon_examples() {
        let r = tightest_epsilon(&randomized_response(1.0).unwrap(), 0.0).unwrap();
        assert!(!r.saturated);
        assert_abs_diff_eq!(r.epsilon, 1.0, epsilon = 1e-9);
        assert_eq!(tightest_epsilon(&bsc(0.5).unwrap(), 0.0).unwrap().epsilon, 0.0);
        let r = tightest_epsilon(&k_rr(3f64.ln(), 3).unwrap(), 0.0).unwrap();
        assert_abs_diff_eq!(r.epsilon, 3f64.ln(), epsilon = 1e-9);
    }

    #[test]
    fn tightest_epsilon_edge_cases() {
        let id = Kernel::identity(2).unwrap();
        let r = tightest_epsilon(&id, 0.5).unwrap();
        assert_eq!(r.epsilon, f64::INFINITY);
        assert!(!r.saturated);
        assert_eq!(tightest_epsilon(&id, 1.0).unwrap().epsilon, 0.0);
        // A partially deterministic row has residual 0.5.
        let k = Kernel::new(vec![vec![0.5, 0.5, 0.0], vec![0.0, 0.5, 0.5]]).unwrap();
        assert_abs_diff_eq!(residual_delta(&k), 0.5, epsilon = 1e-15);
        assert_eq!(tightest_epsilon(&k, 0.4).unwrap().epsilon, f64::INFINITY);
        let r = tightest_epsilon(&k, 0.5).unwrap();
        assert!(r.epsilon.is_finite());
        // Full support but a likelihood ratio beyond e^50.
        let tiny = 1e-30;
        let k = Kernel::new(vec![vec![1.0 - tiny, tiny], vec![tiny, 1.0 - tiny]]).unwrap();
        let r = tightest_epsilon(&k, 0.0).unwrap();
        assert!(r.saturated);
        assert_eq!(r.epsilon, DEFAULT_EPSILON_MAX);
        assert!(tightest_epsilon(&k, 1.5).is_err());
    }

    #[test]
    fn round_trip_through_tightest_epsilon() {
        let k = Kernel::new(vec![vec![0.6, 0.3, 0.1], vec![0.2, 0.5, 0.3], vec![0.1, 0.1, 0.8]]).unwrap();
        for d in [0.0, 0.05, 0.2, 0.4] {
            let r = tightest_epsilon(&k, d).unwrap();
            assert!(!r.saturated);
            assert!(delta_at(&k, r.epsilon).unwrap() <= d + 1e-9);
            if r.epsilon > 1e-6 {
                assert!(delta_at(&k, r.epsilon - 1e-6).unwrap() > d);
            }
        }
    }

    #[test]
    fn profile_is_nonincreasing_and_starts_at_dobrushin() {
        let k = Kernel::new(vec![vec![0.7, 0.2, 0.1], vec![0.1, 0.3, 0.6]]).unwrap();
        let grid: Vec<f64> = (0..=40).map(|i| i as f64 * 0.1).collect();
        let prof = PrivacyProfile::compute(&k, "k", &grid).unwrap();
        assert_abs_diff_eq!(prof.points[0].1, eta_tv_dobrushin(&k), epsilon = 1e-15);
        for w in prof.points.windows(2) {
            assert!(w[1].1 <= w[0].1);
        }
        assert!(prof.to_csv().starts_with("epsilon,delta\n0,"));
        assert!(PrivacyProfile::compute(&k, "k", &[0.0, 0.0]).is_err());
    }

    #[test]
    fn verify_equivalence_examples() {
        let rr = randomized_response(1.0).unwrap();
        let r = verify_equivalence(&rr, params(1.0, 0.0), 1000, DEFAULT_SEED).unwrap();
        assert!(r.certified);
        assert_eq!(r.violations, 0);
        assert!(r.max_ratio <= 1e-12);
        assert!(r.consistent());

        let id = Kernel::identity(2).unwrap();
        let r = verify_equivalence(&id, params(1.0, 0.0), 1000, DEFAULT_SEED).unwrap();
        assert!(!r.certified);
        assert_eq!(r.point_mass_violation, Some((0, 1)));
        assert!(r.consistent());

        let r = verify_equivalence(&k_rr(0.5, 3).unwrap(), params(0.2, 1.0), 10, 1).unwrap();
        assert!(r.certified);
        assert_eq!(r.violations, 0);
        assert!(verify_equivalence(&id, params(1.0, 0.0), 0, 1).is_err());
    }

    #[test]
    fn verify_is_reproducible() {
        let k = k_rr(0.7, 4).unwrap();
        let a = verify_equivalence(&k, params(0.3, 0.1), 200, 9).unwrap();
        let b = verify_equivalence(&k, params(0.3, 0.1), 200, 9).unwrap();
        assert_eq!(a, b);
    }
}
