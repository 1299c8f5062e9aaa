//! Mutual information and `E_γ`-information.
//!
//! Finite joints are handled by [`JointDistribution`]. The
//! [`BernoulliUniformModel`] covers `Θ ~ Uniform[0, 1]` with
//! `X_i | Θ = θ` i.i.d. Bernoulli(θ), where every quantity depends on a
//! sequence `x^n` only through its number of ones `s`. Writing
//! `d_s(θ) = (n + 1) C(n, s) θ^s (1 − θ)^{n−s}` for the likelihood ratio
//! `P(x^n | θ) / P(x^n)`, both informations reduce to `n + 1` one-dimensional
//! integrals over `θ`, evaluated here by composite Simpson.

use crate::dist::{egamma, Distribution, SUM_TOLERANCE};
use crate::error::{Error, Result};
use crate::kernel::{Kernel, DEFAULT_TENSOR_CAP};

/// Joint distribution on `𝒜 × ℬ`, stored row-major (`a` outer).
#[derive(Debug, Clone, PartialEq)]
pub struct JointDistribution {
    probs: Vec<f64>,
    size_a: usize,
    size_b: usize,
}

impl JointDistribution {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let size_a = rows.len();
        let size_b = rows.first().map_or(0, Vec::len);
        if size_a == 0 || size_b == 0 {
            return Err(Error::InvalidDistribution("joint must be non-empty".into()));
        }
        let mut probs = Vec::with_capacity(size_a * size_b);
        for row in rows {
            if row.len() != size_b {
                return Err(Error::Dimension {
                    expected: size_b,
                    actual: row.len(),
                });
            }
            probs.extend(row);
        }
        if let Some(bad) = probs.iter().find(|p| !(p.is_finite() && **p >= 0.0)) {
            return Err(Error::InvalidDistribution(format!("joint entry {bad} is not a probability")));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > SUM_TOLERANCE {
            return Err(Error::InvalidDistribution(format!("joint sums to {total}")));
        }
        Ok(Self { probs, size_a, size_b })
    }

    /// `P_A ⊗ K`: draw `a ~ P_A`, then `b ~ K(· | a)`.
    pub fn from_channel(p_a: &Distribution, k: &Kernel) -> Result<Self> {
        if p_a.alphabet_size() != k.input_size() {
            return Err(Error::Dimension {
                expected: k.input_size(),
                actual: p_a.alphabet_size(),
            });
        }
        let rows = p_a
            .probs()
            .iter()
            .zip(k.rows())
            .map(|(pa, row)| row.probs().iter().map(|kb| pa * kb).collect())
            .collect();
        Self::new(rows)
    }

    pub fn size_a(&self) -> usize {
        self.size_a
    }

    pub fn size_b(&self) -> usize {
        self.size_b
    }

    pub fn get(&self, a: usize, b: usize) -> f64 {
        self.probs[a * self.size_b + b]
    }

    pub fn marginal_a(&self) -> Distribution {
        let probs = self.probs.chunks(self.size_b).map(|r| r.iter().sum()).collect();
        Distribution::new(probs).expect("marginal of a valid joint")
    }

    pub fn marginal_b(&self) -> Distribution {
        let mut probs = vec![0.0; self.size_b];
        for row in self.probs.chunks(self.size_b) {
            for (acc, p) in probs.iter_mut().zip(row) {
                *acc += p;
            }
        }
        Distribution::new(probs).expect("marginal of a valid joint")
    }

    /// The joint flattened row-major into one distribution.
    pub fn flattened(&self) -> Distribution {
        Distribution::new(self.probs.clone()).expect("valid joint")
    }

    /// `P_A × P_B`, flattened in the same order as [`Self::flattened`].
    pub fn product_of_marginals(&self) -> Distribution {
        self.marginal_a().product(&self.marginal_b())
    }

    /// Joint of `(A, B')` where `B' ~ K(· | B)`.
    pub fn apply_to_b(&self, k: &Kernel) -> Result<Self> {
        if k.input_size() != self.size_b {
            return Err(Error::Dimension {
                expected: self.size_b,
                actual: k.input_size(),
            });
        }
        let out = k.output_size();
        let rows = self
            .probs
            .chunks(self.size_b)
            .map(|row| {
                let mut acc = vec![0.0; out];
                for (b, pb) in row.iter().enumerate() {
                    for (z, kz) in k.row(b).probs().iter().enumerate() {
                        acc[z] += pb * kz;
                    }
                }
                acc
            })
            .collect();
        Self::new(rows)
    }
}

/// `I(A; B) = D_KL(P_AB ‖ P_A P_B)` in nats.
pub fn mutual_information(j: &JointDistribution) -> f64 {
    let pa = j.marginal_a();
    let pb = j.marginal_b();
    let mut total = 0.0;
    for a in 0..j.size_a {
        for b in 0..j.size_b {
            let p = j.get(a, b);
            if p > 0.0 {
                total += p * (p / (pa.probs()[a] * pb.probs()[b])).ln();
            }
        }
    }
    total.max(0.0)
}

/// `I_γ(A; B) = E_γ(P_AB ‖ P_A P_B)`.
pub fn egamma_information(j: &JointDistribution, gamma: f64) -> Result<f64> {
    egamma(&j.flattened(), &j.product_of_marginals(), gamma)
}

/// Shannon entropy in nats.
pub fn entropy(p: &Distribution) -> f64 {
    -p.probs().iter().filter(|x| **x > 0.0).map(|x| x * x.ln()).sum::<f64>()
}

/// Default number of Simpson panels on `[0, 1]`.
pub const DEFAULT_PANELS: usize = 20_000;

/// Largest `n` for which the exact rational marginal is available.
pub const MAX_EXACT_N: usize = 12;

/// `Θ ~ Uniform[0, 1]`, `X^n | Θ = θ` i.i.d. Bernoulli(θ).
///
/// The likelihood-ratio densities `d_s` are tabulated once on the Simpson
/// nodes, so repeated `I_γ` evaluations cost `O(n · panels)` each.
#[derive(Debug, Clone)]
pub struct BernoulliUniformModel {
    n: usize,
    panels: usize,
    density: Vec<Vec<f64>>,
    log_density: Vec<Vec<f64>>,
}

impl BernoulliUniformModel {
    pub fn new(n: usize) -> Result<Self> {
        Self::with_panels(n, DEFAULT_PANELS)
    }

    pub fn with_panels(n: usize, panels: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::domain("n", 0.0, "must be >= 1"));
        }
        if panels < 2 || panels % 2 != 0 {
            return Err(Error::domain("panels", panels as f64, "must be even and >= 2"));
        }
        let nodes: Vec<f64> = (0..=panels).map(|i| i as f64 / panels as f64).collect();
        let mut log_density = Vec::with_capacity(n + 1);
        for s in 0..=n {
            let log_coef = ((n + 1) as f64).ln() + ln_binomial(n, s);
            let row: Vec<f64> = nodes
                .iter()
                .map(|&t| {
                    let mut v = log_coef;
                    if s > 0 {
                        v += s as f64 * t.ln();
                    }
                    if s < n {
                        v += (n - s) as f64 * (1.0 - t).ln();
                    }
                    v
                })
                .collect();
            log_density.push(row);
        }
        let density = log_density
            .iter()
            .map(|row| row.iter().map(|v| v.exp()).collect())
            .collect();
        Ok(Self {
            n,
            panels,
            density,
            log_density,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn panels(&self) -> usize {
        self.panels
    }

    fn simpson(&self, mut integrand: impl FnMut(usize) -> f64) -> f64 {
        let mut total = integrand(0) + integrand(self.panels);
        for i in 1..self.panels {
            total += if i % 2 == 1 { 4.0 } else { 2.0 } * integrand(i);
        }
        total / (3.0 * self.panels as f64)
    }

    /// `∫ d_s(θ) dθ` for each `s`; all equal 1 up to quadrature error.
    pub fn density_masses(&self) -> Vec<f64> {
        self.density.iter().map(|row| self.simpson(|i| row[i])).collect()
    }
}

fn ln_binomial(n: usize, s: usize) -> f64 {
    let s = s.min(n - s);
    (0..s).map(|i| ((n - i) as f64 / (i + 1) as f64).ln()).sum()
}

/// `I_γ(Θ; X^n) = (1/(n+1)) Σ_s ∫ [d_s(θ) − γ]_+ dθ − (1 − γ)_+`.
pub fn bu_igamma(model: &BernoulliUniformModel, gamma: f64) -> Result<f64> {
    if !(gamma >= 0.0) || !gamma.is_finite() {
        return Err(Error::domain("gamma", gamma, "must be finite and >= 0"));
    }
    let sum: f64 = model
        .density
        .iter()
        .map(|row| model.simpson(|i| (row[i] - gamma).max(0.0)))
        .sum();
    let value = sum / (model.n + 1) as f64 - (1.0 - gamma).max(0.0);
    Ok(value.max(0.0))
}

/// `I_γ(Θ; X)` for a single observation, in closed form.
pub fn bu_igamma_closed_n1(gamma: f64) -> f64 {
    if (0.0..=1.0).contains(&gamma) {
        0.25 * gamma * gamma
    } else if (1.0..=2.0).contains(&gamma) {
        0.25 * (gamma - 2.0).powi(2)
    } else {
        0.0
    }
}

/// `I(Θ; X^n) = (1/(n+1)) Σ_s ∫ d_s ln d_s dθ` in nats.
pub fn bu_mutual_information(model: &BernoulliUniformModel) -> f64 {
    let sum: f64 = model
        .density
        .iter()
        .zip(&model.log_density)
        .map(|(d, ld)| model.simpson(|i| if d[i] > 0.0 { d[i] * ld[i] } else { 0.0 }))
        .sum();
    (sum / (model.n + 1) as f64).max(0.0)
}

/// Exact marginal of `X^n`: every sequence with `s` ones has probability
/// `s!(n−s)!/(n+1)!`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExactMarginal {
    pub n: usize,
    /// Number of sequences with `s` ones, `C(n, s)`.
    pub counts: Vec<u64>,
    /// Per-sequence numerator `s!(n−s)!`.
    pub numerators: Vec<u64>,
    /// `(n + 1)!`.
    pub denominator: u64,
}

impl ExactMarginal {
    /// `Σ_s C(n, s) s!(n−s)!`, which equals the denominator.
    pub fn total_numerator(&self) -> u64 {
        self.counts.iter().zip(&self.numerators).map(|(c, m)| c * m).sum()
    }
}

pub fn bu_exact_marginal(n: usize) -> Result<ExactMarginal> {
    if n == 0 || n > MAX_EXACT_N {
        return Err(Error::domain("n", n as f64, "exact marginal needs 1 <= n <= 12"));
    }
    let fact = |m: usize| (1..=m as u64).product::<u64>();
    let counts = (0..=n).map(|s| fact(n) / (fact(s) * fact(n - s))).collect();
    let numerators = (0..=n).map(|s| fact(s) * fact(n - s)).collect();
    Ok(ExactMarginal {
        n,
        counts,
        numerators,
        denominator: fact(n + 1),
    })
}

/// Marginal of `X^n` over all `2^n` sequences; bit `n − 1 − i` of the index
/// is `x_i`, so `x_1` is the most significant coordinate.
pub fn bu_sequence_marginal(n: usize) -> Result<Distribution> {
    let exact = bu_exact_marginal(n)?;
    let size = 1usize << n;
    if size > DEFAULT_TENSOR_CAP {
        return Err(Error::Capacity {
            what: "sequence marginal",
            size: size as u128,
            cap: DEFAULT_TENSOR_CAP,
        });
    }
    let probs = (0..size)
        .map(|idx| {
            let s = (idx as u64).count_ones() as usize;
            exact.numerators[s] as f64 / exact.denominator as f64
        })
        .collect();
    Distribution::new(probs)
}
