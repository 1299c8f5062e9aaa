//! Finite probability distributions and the divergences between them.
//!
//! Every divergence here is an f-divergence `D_f(P‖Q) = Σ_i q_i f(p_i / q_i)`
//! evaluated through the perspective `q f(p/q)`, so that `q_i = 0` entries
//! take their limiting value instead of dividing by zero. KL is in nats.
//!
//! The hockey-stick divergence `E_γ` has three equivalent closed forms; all
//! three are exposed so they can be checked against each other:
//!
//! | form | expression |
//! |------|------------|
//! | sup over sets | `Σ_i (p_i − γ q_i)_+ − (1 − γ)_+` |
//! | integral | `½ Σ_i |p_i − γ q_i| − ½ |1 − γ|` |
//! | likelihood-ratio threshold | `P(p/q > γ) − γ Q(p/q > γ) − (1 − γ)_+` |

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fmt::sig17;

/// Tolerated deviation of a probability vector's sum from one.
pub const SUM_TOLERANCE: f64 = 1e-12;

/// Sums deviating by less than this are renormalized instead of rejected.
pub const RENORMALIZE_TOLERANCE: f64 = 1e-9;

/// A probability vector over the alphabet `{0, …, len − 1}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct Distribution {
    probs: Vec<f64>,
}

impl Distribution {
    /// Validate `probs` as a probability vector.
    ///
    /// Entries must be finite and non-negative. A sum within
    /// [`SUM_TOLERANCE`] of one is kept verbatim, a sum within
    /// [`RENORMALIZE_TOLERANCE`] is rescaled, anything else is rejected.
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::InvalidDistribution("empty alphabet".into()));
        }
        if let Some((i, v)) = probs
            .iter()
            .enumerate()
            .find(|(_, v)| !v.is_finite() || **v < 0.0)
        {
            return Err(Error::InvalidDistribution(format!(
                "entry {i} is {v}, expected a finite non-negative number"
            )));
        }
        let sum: f64 = probs.iter().sum();
        let deviation = (sum - 1.0).abs();
        if deviation <= SUM_TOLERANCE {
            Ok(Self { probs })
        } else if deviation < RENORMALIZE_TOLERANCE {
            Ok(Self {
                probs: probs.into_iter().map(|p| p / sum).collect(),
            })
        } else {
            Err(Error::InvalidDistribution(format!(
                "entries sum to {sum}, expected 1"
            )))
        }
    }

    /// Point mass at `index` over an alphabet of `size` symbols.
    pub fn point_mass(size: usize, index: usize) -> Result<Self> {
        if index >= size {
            return Err(Error::Dimension {
                expected: size,
                actual: index + 1,
            });
        }
        let mut probs = vec![0.0; size];
        probs[index] = 1.0;
        Ok(Self { probs })
    }

    pub fn uniform(size: usize) -> Result<Self> {
        if size == 0 {
            return Err(Error::InvalidDistribution("empty alphabet".into()));
        }
        Ok(Self {
            probs: vec![1.0 / size as f64; size],
        })
    }

    /// `Bernoulli(p)` as the vector `[1 − p, p]`.
    pub fn bernoulli(p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::domain("p", p, "must lie in [0, 1]"));
        }
        Ok(Self {
            probs: vec![1.0 - p, p],
        })
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn alphabet_size(&self) -> usize {
        self.probs.len()
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.probs
    }

    /// Product measure `self ⊗ other`, flattened row-major with `self` as
    /// the most significant coordinate.
    pub fn product(&self, other: &Distribution) -> Distribution {
        let probs = self
            .probs
            .iter()
            .flat_map(|a| other.probs.iter().map(move |b| a * b))
            .collect();
        Distribution { probs }
    }

    /// Parse a JSON array or a single CSV line of probabilities.
    pub fn parse(text: &str) -> Result<Self> {
        let trimmed = text.trim();
        let values: Vec<f64> = if trimmed.starts_with('[') {
            serde_json::from_str(trimmed).map_err(|e| Error::Parse(e.to_string()))?
        } else {
            if trimmed.lines().count() > 1 {
                return Err(Error::Parse(
                    "expected a single CSV line of probabilities".into(),
                ));
            }
            parse_csv_fields(trimmed)?
        };
        Self::new(values)
    }

    /// JSON array with 17 significant digits per entry.
    pub fn to_json_string(&self) -> String {
        let fields: Vec<String> = self.probs.iter().map(|p| sig17(*p)).collect();
        format!("[{}]", fields.join(","))
    }

    /// Single CSV line with 17 significant digits per entry.
    pub fn to_csv_line(&self) -> String {
        crate::fmt::csv_record(&self.probs)
    }
}

impl<'de> Deserialize<'de> for Distribution {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let probs = Vec::<f64>::deserialize(d)?;
        Distribution::new(probs).map_err(serde::de::Error::custom)
    }
}

pub(crate) fn parse_csv_fields(line: &str) -> Result<Vec<f64>> {
    line.split(',')
        .map(|f| {
            let f = f.trim();
            f.parse::<f64>()
                .map_err(|e| Error::Parse(format!("field `{f}`: {e}")))
        })
        .collect()
}

/// Generator `f` of an f-divergence. Each variant is convex with `f(1) = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum FGenerator {
    /// `f(t) = |t − 1| / 2`, so that total variation equals `E_1`.
    TotalVariation,
    /// `f(t) = t ln t`.
    Kl,
    /// `f(t) = (t − 1)²`.
    ChiSquared,
    /// `f(t) = (√t − 1)²`.
    HellingerSquared,
    /// `f(t) = (t − γ)_+ − (1 − γ)_+`.
    Egamma { gamma: f64 },
}

impl FGenerator {
    pub fn validate(&self) -> Result<()> {
        match *self {
            FGenerator::Egamma { gamma } if !(gamma >= 0.0) || !gamma.is_finite() => {
                Err(Error::domain("gamma", gamma, "must be finite and >= 0"))
            }
            _ => Ok(()),
        }
    }

    /// Perspective `q · f(p / q)` with the limiting value at `q = 0`.
    fn perspective(&self, p: f64, q: f64) -> f64 {
        if p == 0.0 && q == 0.0 {
            return 0.0;
        }
        match *self {
            FGenerator::TotalVariation => 0.5 * (p - q).abs(),
            FGenerator::Kl => {
                if q == 0.0 {
                    f64::INFINITY
                } else if p == 0.0 {
                    q
                } else {
                    // p ln(p/q) − p + q: the extra terms cancel across the
                    // alphabet and keep each summand non-negative.
                    q * kl_integrand((p - q) / q)
                }
            }
            FGenerator::ChiSquared => {
                if q == 0.0 {
                    f64::INFINITY
                } else {
                    (p - q) * (p - q) / q
                }
            }
            FGenerator::HellingerSquared => {
                let d = p - q;
                let s = p.sqrt() + q.sqrt();
                (d / s) * (d / s)
            }
            FGenerator::Egamma { gamma } => {
                let hinge = (p - gamma * q).max(0.0);
                if gamma < 1.0 {
                    hinge - (1.0 - gamma) * q
                } else {
                    hinge
                }
            }
        }
    }
}

/// `(1 + t) ln(1 + t) − t`, accurate for small `|t|`.
fn kl_integrand(t: f64) -> f64 {
    if t.abs() < 1e-3 {
        let t2 = t * t;
        t2 * (0.5 - t / 6.0 + t2 / 12.0 - t2 * t / 20.0)
    } else {
        (1.0 + t) * t.ln_1p() - t
    }
}

fn check_dims(p: &Distribution, q: &Distribution) -> Result<()> {
    if p.alphabet_size() != q.alphabet_size() {
        return Err(Error::Dimension {
            expected: p.alphabet_size(),
            actual: q.alphabet_size(),
        });
    }
    Ok(())
}

fn check_gamma(gamma: f64) -> Result<()> {
    if !(gamma >= 0.0) || !gamma.is_finite() {
        return Err(Error::domain("gamma", gamma, "must be finite and >= 0"));
    }
    Ok(())
}

/// Total variation distance `½ Σ |p_i − q_i|`.
pub fn tv(p: &Distribution, q: &Distribution) -> Result<f64> {
    check_dims(p, q)?;
    let s: f64 = p
        .probs
        .iter()
        .zip(&q.probs)
        .map(|(a, b)| (a - b).abs())
        .sum();
    Ok(0.5 * s)
}

/// Hockey-stick divergence `E_γ(P‖Q)` via the sup-over-sets form.
///
/// The maximizing set is `{i : p_i > γ q_i}`, so the sup reduces to a sum of
/// positive parts.
pub fn egamma(p: &Distribution, q: &Distribution, gamma: f64) -> Result<f64> {
    check_dims(p, q)?;
    check_gamma(gamma)?;
    Ok(egamma_rows(&p.probs, &q.probs, gamma))
}

/// `E_γ` on raw probability slices of equal length. Callers validate.
pub(crate) fn egamma_rows(p: &[f64], q: &[f64], gamma: f64) -> f64 {
    let hinge: f64 = p
        .iter()
        .zip(q)
        .map(|(a, b)| (a - gamma * b).max(0.0))
        .sum();
    (hinge - (1.0 - gamma).max(0.0)).max(0.0)
}

/// `E_γ(P‖Q) = ½ Σ |p_i − γ q_i| − ½ |1 − γ|`.
pub fn egamma_integral_form(p: &Distribution, q: &Distribution, gamma: f64) -> Result<f64> {
    check_dims(p, q)?;
    check_gamma(gamma)?;
    let s: f64 = p
        .probs
        .iter()
        .zip(&q.probs)
        .map(|(a, b)| (a - gamma * b).abs())
        .sum();
    Ok(0.5 * s - 0.5 * (1.0 - gamma).abs())
}

/// `E_γ(P‖Q) = P(L > ln γ) − γ Q(L > ln γ) − (1 − γ)_+` with `L = ln(dP/dQ)`.
pub fn egamma_threshold_form(p: &Distribution, q: &Distribution, gamma: f64) -> Result<f64> {
    check_dims(p, q)?;
    check_gamma(gamma)?;
    let log_gamma = gamma.ln();
    let (mut p_mass, mut q_mass) = (0.0, 0.0);
    for (&a, &b) in p.probs.iter().zip(&q.probs) {
        let llr = match (a > 0.0, b > 0.0) {
            (false, _) => f64::NEG_INFINITY,
            (true, false) => f64::INFINITY,
            (true, true) => (a / b).ln(),
        };
        if llr > log_gamma {
            p_mass += a;
            q_mass += b;
        }
    }
    Ok(p_mass - gamma * q_mass - (1.0 - gamma).max(0.0))
}

/// `D_f(P‖Q) = Σ_i q_i f(p_i / q_i)`.
///
/// KL and χ² return `f64::INFINITY` when `P` is not absolutely continuous
/// with respect to `Q`; the bounded generators return finite values.
pub fn f_divergence(p: &Distribution, q: &Distribution, f: FGenerator) -> Result<f64> {
    check_dims(p, q)?;
    f.validate()?;
    let total: f64 = p
        .probs
        .iter()
        .zip(&q.probs)
        .map(|(a, b)| f.perspective(*a, *b))
        .sum();
    Ok(match f {
        // Round-off can push the sum of exactly-cancelling terms below zero.
        FGenerator::Egamma { .. } => total.max(0.0),
        _ => total,
    })
}

/// Kullback-Leibler divergence in nats.
pub fn kl(p: &Distribution, q: &Distribution) -> Result<f64> {
    f_divergence(p, q, FGenerator::Kl)
}

pub fn chi_squared(p: &Distribution, q: &Distribution) -> Result<f64> {
    f_divergence(p, q, FGenerator::ChiSquared)
}

/// Squared Hellinger distance `Σ (√p_i − √q_i)²`, in `[0, 2]`.
pub fn hellinger_sq(p: &Distribution, q: &Distribution) -> Result<f64> {
    f_divergence(p, q, FGenerator::HellingerSquared)
}
