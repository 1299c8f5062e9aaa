//! Brute-force reference computations.
//!
//! Nothing in this module uses the two-point formula or the closed-form
//! `E_γ` sums. [`brute_eta_f`] searches the ratio `D_f(PK‖QK)/D_f(P‖Q)` over
//! sampled and point-mass input pairs. [`brute_profile_check`] enumerates every
//! output event `A ⊂ Z` in the raw LDP definition. Both are meant for tiny
//! alphabets and for cross-checking the closed forms elsewhere in the crate.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution as _, Gamma};
use serde::{Deserialize, Serialize};

use crate::dist::{f_divergence, Distribution, FGenerator};
use crate::error::{Error, Result};
use crate::kernel::{pushforward, Kernel};

/// Largest output alphabet [`brute_profile_check`] will enumerate.
pub const MAX_SUBSET_ALPHABET: usize = 20;

/// Pairs whose input divergence is below this are skipped by [`brute_eta_f`].
pub const MIN_DENOMINATOR: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchConfig {
    pub seed: u64,
    pub trials: usize,
    pub include_point_masses: bool,
    pub dirichlet_alpha: f64,
    /// Mixing weights `h` for the near-coincident pairs `(P, (1 − h)P + hR)`
    /// added for KL and χ², whose contraction sups are approached locally.
    pub near_coincident_steps: Vec<f64>,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            seed: 0x5eed,
            trials: 1000,
            include_point_masses: true,
            dirichlet_alpha: 1.0,
            near_coincident_steps: vec![1e-3, 1e-4],
        }
    }
}

impl SearchConfig {
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::domain("trials", 0.0, "must be >= 1"));
        }
        if !(self.dirichlet_alpha > 0.0) {
            return Err(Error::domain("dirichlet_alpha", self.dirichlet_alpha, "must be > 0"));
        }
        if let Some(h) = self.near_coincident_steps.iter().find(|h| !(**h > 0.0 && **h <= 1.0)) {
            return Err(Error::domain("near_coincident_steps", *h, "must lie in (0, 1]"));
        }
        Ok(())
    }
}

/// Seeded generator used by every sampler in the crate.
pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Draw from the symmetric Dirichlet(α, …, α) over `size` symbols.
pub fn dirichlet<R: Rng + ?Sized>(rng: &mut R, size: usize, alpha: f64) -> Result<Distribution> {
    let gamma = Gamma::new(alpha, 1.0)
        .map_err(|_| Error::domain("dirichlet_alpha", alpha, "must be > 0"))?;
    loop {
        let draws: Vec<f64> = (0..size).map(|_| gamma.sample(rng)).collect();
        let total: f64 = draws.iter().sum();
        // All-zero draws only happen for tiny alpha; resample.
        if total > 0.0 {
            return Distribution::new(draws.into_iter().map(|g| g / total).collect());
        }
    }
}

/// Best ratio found by [`brute_eta_f`], with the pair that produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EtaEstimate {
    pub value: f64,
    pub witness: Option<(Distribution, Distribution)>,
    pub pairs_evaluated: usize,
}

/// Lower estimate of `η_f(K)` from sampled input pairs.
///
/// With point masses enabled this is exact for `TV` and `E_γ` with `γ ≥ 1`,
/// where the sup is attained at a pair of point masses.
pub fn brute_eta_f(k: &Kernel, f: FGenerator, cfg: &SearchConfig) -> Result<EtaEstimate> {
    cfg.validate()?;
    f.validate()?;
    let size = k.input_size();
    let mut best = EtaEstimate {
        value: 0.0,
        witness: None,
        pairs_evaluated: 0,
    };
    let mut consider = |p: Distribution, q: Distribution| -> Result<()> {
        best.pairs_evaluated += 1;
        let den = f_divergence(&p, &q, f)?;
        if !den.is_finite() || den < MIN_DENOMINATOR {
            return Ok(());
        }
        let num = f_divergence(&pushforward(&p, k)?, &pushforward(&q, k)?, f)?;
        let ratio = num / den;
        if ratio > best.value {
            best.value = ratio;
            best.witness = Some((p, q));
        }
        Ok(())
    };

    if cfg.include_point_masses {
        for x in 0..size {
            for x2 in 0..size {
                if x != x2 {
                    consider(Distribution::point_mass(size, x)?, Distribution::point_mass(size, x2)?)?;
                }
            }
        }
    }
    let local = matches!(f, FGenerator::Kl | FGenerator::ChiSquared);
    let mut rng = seeded_rng(cfg.seed);
    for _ in 0..cfg.trials {
        let p = dirichlet(&mut rng, size, cfg.dirichlet_alpha)?;
        let q = dirichlet(&mut rng, size, cfg.dirichlet_alpha)?;
        if local {
            for &h in &cfg.near_coincident_steps {
                let mixed: Vec<f64> = p
                    .probs()
                    .iter()
                    .zip(q.probs())
                    .map(|(a, b)| (1.0 - h) * a + h * b)
                    .collect();
                consider(p.clone(), Distribution::new(mixed)?)?;
            }
        }
        consider(p, q)?;
    }
    Ok(best)
}

/// Largest `K(A|x) − e^ε K(A|x')` over inputs and output events.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileCheck {
    pub epsilon: f64,
    pub delta: f64,
    pub input_pair: (usize, usize),
    /// Output symbols of the maximizing event.
    pub event: Vec<usize>,
}

/// Smallest `δ` for which `k` is `(ε, δ)`-LDP, by enumerating all `2^|Z|`
/// output events for every ordered input pair.
pub fn brute_profile_check(k: &Kernel, epsilon: f64) -> Result<ProfileCheck> {
    if !(epsilon >= 0.0) {
        return Err(Error::domain("epsilon", epsilon, "must be >= 0"));
    }
    let m = k.output_size();
    if m > MAX_SUBSET_ALPHABET {
        return Err(Error::Capacity {
            what: "output events",
            size: 1u128 << m,
            cap: 1 << MAX_SUBSET_ALPHABET,
        });
    }
    let gamma = epsilon.exp();
    let mut sums = vec![0.0f64; 1 << m];
    let mut best = ProfileCheck {
        epsilon,
        delta: 0.0,
        input_pair: (0, 0),
        event: Vec::new(),
    };
    let mut best_mask = 0usize;
    for x in 0..k.input_size() {
        for x2 in 0..k.input_size() {
            let a = k.row(x).probs();
            let b = k.row(x2).probs();
            for mask in 1usize..(1 << m) {
                let z = mask.trailing_zeros() as usize;
                sums[mask] = sums[mask & (mask - 1)] + (a[z] - gamma * b[z]);
                if sums[mask] > best.delta {
                    best.delta = sums[mask];
                    best.input_pair = (x, x2);
                    best_mask = mask;
                }
            }
        }
    }
    best.event = (0..m).filter(|z| best_mask >> z & 1 == 1).collect();
    Ok(best)
}

/// Point spacing of a [`Grid`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Spacing {
    Linear,
    Log,
}

/// `steps` points from `lo` to `hi` inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub lo: f64,
    pub hi: f64,
    pub steps: usize,
    pub spacing: Spacing,
}

impl Grid {
    pub fn linear(lo: f64, hi: f64, steps: usize) -> Result<Self> {
        let g = Self {
            lo,
            hi,
            steps,
            spacing: Spacing::Linear,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn log(lo: f64, hi: f64, steps: usize) -> Result<Self> {
        let g = Self {
            lo,
            hi,
            steps,
            spacing: Spacing::Log,
        };
        g.validate()?;
        Ok(g)
    }

    /// Parse `lo:hi:steps` as a linear grid.
    pub fn parse_linear(spec: &str) -> Result<Self> {
        let parts: Vec<&str> = spec.split(':').collect();
        if parts.len() != 3 {
            return Err(Error::Parse(format!("grid `{spec}`: expected lo:hi:steps")));
        }
        let num = |s: &str| {
            s.trim()
                .parse::<f64>()
                .map_err(|e| Error::Parse(format!("grid `{spec}`: {e}")))
        };
        let steps = parts[2]
            .trim()
            .parse::<usize>()
            .map_err(|e| Error::Parse(format!("grid `{spec}`: {e}")))?;
        Self::linear(num(parts[0])?, num(parts[1])?, steps)
    }

    pub fn validate(&self) -> Result<()> {
        if self.steps < 2 {
            return Err(Error::domain("steps", self.steps as f64, "grid needs >= 2 points"));
        }
        if !(self.lo.is_finite() && self.hi.is_finite()) || !(self.hi > self.lo) {
            return Err(Error::domain("hi", self.hi, "grid needs finite lo < hi"));
        }
        if self.spacing == Spacing::Log && !(self.lo > 0.0) {
            return Err(Error::domain("lo", self.lo, "log grid needs lo > 0"));
        }
        Ok(())
    }

    pub fn points(&self) -> Vec<f64> {
        let last = (self.steps - 1) as f64;
        (0..self.steps)
            .map(|i| {
                if i == 0 {
                    return self.lo;
                }
                if i + 1 == self.steps {
                    return self.hi;
                }
                let t = i as f64 / last;
                match self.spacing {
                    Spacing::Linear => self.lo + t * (self.hi - self.lo),
                    Spacing::Log => (self.lo.ln() + t * (self.hi.ln() - self.lo.ln())).exp(),
                }
            })
            .collect()
    }

    pub fn contains(&self, v: f64) -> bool {
        v >= self.lo && v <= self.hi
    }
}

/// Maximizer of a one-dimensional grid scan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridMax {
    pub argmax: f64,
    pub index: usize,
    pub value: f64,
}

/// Maximizer of a two-dimensional grid scan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridMax2 {
    pub argmax: (f64, f64),
    pub index: (usize, usize),
    pub value: f64,
}

/// Scan `grid` and return the first point attaining the largest value.
///
/// NaN objective values are ignored; an all-NaN or empty grid is an error.
pub fn grid_max<F: FnMut(f64) -> f64>(grid: &[f64], mut objective: F) -> Result<GridMax> {
    let mut best: Option<GridMax> = None;
    for (i, &x) in grid.iter().enumerate() {
        let v = objective(x);
        if v.is_nan() {
            continue;
        }
        if best.as_ref().is_none_or(|b| v > b.value) {
            best = Some(GridMax {
                argmax: x,
                index: i,
                value: v,
            });
        }
    }
    best.ok_or_else(|| Error::domain("grid", grid.len() as f64, "no evaluable grid point"))
}

/// Two-dimensional scan, row-major over `(outer, inner)`; ties go to the
/// smallest `(i, j)`. The objective receives grid indices so that callers
/// can look up precomputed per-point tables.
pub fn grid_max_2d<F: FnMut(usize, usize) -> f64>(
    outer: &[f64],
    inner: &[f64],
    mut objective: F,
) -> Result<GridMax2> {
    let mut best: Option<GridMax2> = None;
    for (i, &a) in outer.iter().enumerate() {
        for (j, &b) in inner.iter().enumerate() {
            let v = objective(i, j);
            if v.is_nan() {
                continue;
            }
            if best.as_ref().is_none_or(|m| v > m.value) {
                best = Some(GridMax2 {
                    argmax: (a, b),
                    index: (i, j),
                    value: v,
                });
            }
        }
    }
    best.ok_or_else(|| {
        Error::domain("grid", (outer.len() * inner.len()) as f64, "no evaluable grid point")
    })
}
