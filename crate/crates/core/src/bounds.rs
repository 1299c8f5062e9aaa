//! Minimax and Bayes risk lower bounds under `(ε, δ)`-LDP.
//!
//! Each calculator returns a [`BoundReport`] carrying the value, the
//! optimizer arguments (`ζ*`, `γ*`, `ω*`, `k*`) and an echo of its inputs.
//! Negative brackets are clamped to zero and flagged as vacuous. Suprema are
//! taken over finite grids, ties going to the smallest grid index.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::contraction::{phi, phi_n, PrivacyParams};
use crate::error::{Error, Result};
use crate::oracle::{grid_max, grid_max_2d, Grid};

pub const LN_2: f64 = std::f64::consts::LN_2;

/// Extra information attached to a [`BoundReport`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundFlag {
    /// The bracket was negative and the value was clamped to 0.
    Vacuous,
    /// Perfect privacy (`φ = 0`); the bound does not depend on the data.
    Trivial,
    /// An explicit-constant evaluation of an order-of-magnitude statement.
    ExplicitConstantVariant,
    /// No grid point had a usable bracket.
    EmptyFeasibleGrid,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub bound_name: String,
    pub value: f64,
    pub witness: BTreeMap<String, f64>,
    pub inputs: serde_json::Value,
    pub flags: Vec<BoundFlag>,
}

impl BoundReport {
    pub fn new(name: &str, value: f64, inputs: serde_json::Value) -> Self {
        Self {
            bound_name: name.to_owned(),
            value,
            witness: BTreeMap::new(),
            inputs,
            flags: Vec::new(),
        }
    }

    pub fn with_witness(mut self, key: &str, v: f64) -> Self {
        self.witness.insert(key.to_owned(), v);
        self
    }

    /// Add `f` when `on` holds; flags stay sorted and unique.
    pub fn flag(mut self, f: BoundFlag, on: bool) -> Self {
        if on && !self.flags.contains(&f) {
            self.flags.push(f);
            self.flags.sort();
        }
        self
    }

    pub fn has_flag(&self, f: BoundFlag) -> bool {
        self.flags.contains(&f)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string(self).expect("report serializes")
    }
}

fn check_positive(name: &'static str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(name, v, "must be finite and > 0"))
    }
}

fn check_nonnegative(name: &'static str, v: f64) -> Result<()> {
    if v >= 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(name, v, "must be finite and >= 0"))
    }
}

fn check_n(n: usize) -> Result<()> {
    if n == 0 {
        Err(Error::domain("n", 0.0, "must be >= 1"))
    } else {
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LeCamConfig {
    /// Half the loss separation between the two hypotheses.
    pub tau: f64,
    pub kl_p0_p1: f64,
    pub n: usize,
    pub params: PrivacyParams,
}

impl LeCamConfig {
    pub fn validate(&self) -> Result<()> {
        check_positive("tau", self.tau)?;
        check_nonnegative("kl", self.kl_p0_p1)?;
        check_n(self.n)
    }
}

fn lecam_value(tau: f64, n: usize, kl_scaled: f64) -> f64 {
    tau / 2.0 * (1.0 - (n as f64 * kl_scaled / 2.0).sqrt())
}

/// `(τ/2)(1 − √(n φ KL / 2))`, clamped at 0.
pub fn lecam_private(cfg: &LeCamConfig) -> Result<BoundReport> {
    cfg.validate()?;
    let p = phi(cfg.params);
    let raw = lecam_value(cfg.tau, cfg.n, p * cfg.kl_p0_p1);
    Ok(BoundReport::new("lecam", raw.max(0.0), json!(cfg))
        .with_witness("phi", p)
        .flag(BoundFlag::Vacuous, raw < 0.0)
        .flag(BoundFlag::Trivial, p == 0.0))
}

/// Non-private two-point bound `(τ/2)(1 − √(n KL / 2))`, clamped at 0.
pub fn lecam_nonprivate(tau: f64, kl_p0_p1: f64, n: usize) -> Result<f64> {
    check_positive("tau", tau)?;
    check_nonnegative("kl", kl_p0_p1)?;
    check_n(n)?;
    Ok(lecam_value(tau, n, kl_p0_p1).max(0.0))
}

/// Explicit-constant lower bound for estimating a `k`-th moment-bounded mean.
///
/// Uses the three-point construction with mixing weight
/// `ω = min{1, (1 − (7/8)^{1/√n}) / φ}` and
/// `TV(M_0^n, M_1^n) ≤ √(2 − 2(1 − ωφ)^n)`, giving
/// `ω^{2(k−1)/k} · max(0, 1 − √2 · √(1 − (1 − ωφ)^n))`.
pub fn moment_estimation_lb(k_moment: f64, n: usize, params: PrivacyParams) -> Result<BoundReport> {
    if !(k_moment > 1.0) || !k_moment.is_finite() {
        return Err(Error::domain("k_moment", k_moment, "must be finite and > 1"));
    }
    check_n(n)?;
    let p = phi(params);
    let inputs = json!({"k_moment": k_moment, "n": n, "params": params});
    if p == 0.0 {
        return Ok(BoundReport::new("moment", 1.0, inputs)
            .with_witness("omega", 1.0)
            .flag(BoundFlag::Trivial, true)
            .flag(BoundFlag::ExplicitConstantVariant, true));
    }
    let omega = ((1.0 - (7.0f64 / 8.0).powf(1.0 / (n as f64).sqrt())) / p).min(1.0);
    let keep = (1.0 - omega * p).powi(n as i32);
    let bracket = 1.0 - 2f64.sqrt() * (1.0 - keep).max(0.0).sqrt();
    let value = omega.powf(2.0 * (k_moment - 1.0) / k_moment) * bracket.max(0.0);
    Ok(BoundReport::new("moment", value, inputs)
        .with_witness("omega", omega)
        .flag(BoundFlag::Vacuous, bracket < 0.0)
        .flag(BoundFlag::ExplicitConstantVariant, true))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FanoConfig {
    /// Size of the packing `|𝒱|`.
    pub v_count: usize,
    /// `(1/|𝒱|²) Σ_{v,v'} D_KL(P_v ‖ P_v')` in nats.
    pub avg_pairwise_kl: f64,
    pub tau: f64,
    pub n: usize,
    pub params: PrivacyParams,
    /// `I(X^n; V)` when known; replaces the KL-average bound.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mi_xn_v: Option<f64>,
}

impl FanoConfig {
    pub fn validate(&self) -> Result<()> {
        if self.v_count < 2 {
            return Err(Error::domain("v_count", self.v_count as f64, "must be >= 2"));
        }
        check_nonnegative("avg_pairwise_kl", self.avg_pairwise_kl)?;
        check_positive("tau", self.tau)?;
        check_n(self.n)?;
        if let Some(mi) = self.mi_xn_v {
            check_nonnegative("mi_xn_v", mi)?;
        }
        Ok(())
    }
}

/// Coefficient `n φ_n(ε, δ)` multiplying the average pairwise KL.
pub fn contraction_mi_coefficient(params: PrivacyParams, n: usize) -> f64 {
    n as f64 * phi_n(params, n)
}

/// Coefficient `2(e^ε − 1) n` of the pure-LDP mutual information bound of
/// Duchi, Jordan and Wainwright.
pub fn duchi_mi_coefficient(epsilon: f64, n: usize) -> f64 {
    2.0 * epsilon.exp_m1() * n as f64
}

/// Upper bound on `I(Z^n; V)` for the privatized sample.
pub fn fano_mi_upper(cfg: &FanoConfig) -> Result<f64> {
    cfg.validate()?;
    let pn = phi_n(cfg.params, cfg.n);
    Ok(match cfg.mi_xn_v {
        Some(mi) => pn * mi,
        None => contraction_mi_coefficient(cfg.params, cfg.n) * cfg.avg_pairwise_kl,
    })
}

fn fano_value(tau: f64, mi: f64, v_count: usize) -> f64 {
    tau * (1.0 - (mi + LN_2) / (v_count as f64).ln())
}

/// `τ (1 − (I + ln 2) / ln |𝒱|)` with `I` from [`fano_mi_upper`].
pub fn fano_lb(cfg: &FanoConfig) -> Result<BoundReport> {
    let mi = fano_mi_upper(cfg)?;
    let raw = fano_value(cfg.tau, mi, cfg.v_count);
    Ok(BoundReport::new("fano", raw.max(0.0), json!(cfg))
        .with_witness("mi_upper", mi)
        .flag(BoundFlag::Vacuous, raw < 0.0)
        .flag(BoundFlag::Trivial, phi_n(cfg.params, cfg.n) == 0.0))
}

/// Non-private Fano bound with `I(X^n; V) ≤ n · avg_pairwise_kl`.
pub fn fano_nonprivate(v_count: usize, avg_pairwise_kl: f64, tau: f64, n: usize) -> Result<f64> {
    if v_count < 2 {
        return Err(Error::domain("v_count", v_count as f64, "must be >= 2"));
    }
    check_nonnegative("avg_pairwise_kl", avg_pairwise_kl)?;
    check_positive("tau", tau)?;
    check_n(n)?;
    Ok(fano_value(tau, n as f64 * avg_pairwise_kl, v_count).max(0.0))
}

/// Explicit-constant lower bound for `d`-dimensional mean estimation in a
/// ball of radius `r`.
///
/// With `k = max(16, min(⌊n φ_n⌋, d))` and `ω = min{1, k / (50 n φ_n)}` the
/// value is `(r² ω² / k) · max(0, 1 − 16 (1 + n ω φ_n) ln 2 / k)`.
pub fn highdim_mean_lb(d: usize, r: f64, n: usize, params: PrivacyParams) -> Result<BoundReport> {
    if d == 0 {
        return Err(Error::domain("d", 0.0, "must be >= 1"));
    }
    check_positive("r", r)?;
    check_n(n)?;
    let pn = phi_n(params, n);
    let n_eff = n as f64 * pn;
    let k = (n_eff.floor().min(d as f64)).max(16.0);
    let omega = if n_eff > 0.0 { (k / (50.0 * n_eff)).min(1.0) } else { 1.0 };
    let bracket = 1.0 - 16.0 * (1.0 + n_eff * omega) * LN_2 / k;
    let value = r * r * omega * omega / k * bracket.max(0.0);
    Ok(BoundReport::new("highdim", value, json!({"d": d, "r": r, "n": n, "params": params}))
        .with_witness("omega", omega)
        .with_witness("k", k)
        .flag(BoundFlag::Vacuous, bracket < 0.0)
        .flag(BoundFlag::Trivial, pn == 0.0)
        .flag(BoundFlag::ExplicitConstantVariant, true))
}

/// Small-ball function `L(ζ) = sup_t P(ℓ(Θ, t) ≤ ζ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SmallBall {
    /// `min{slope · ζ, 1}`; slope 2 is the uniform prior on `[0, 1]` with
    /// absolute loss.
    Linear { slope: f64 },
    Constant { value: f64 },
}

impl SmallBall {
    pub fn eval(&self, zeta: f64) -> f64 {
        match *self {
            SmallBall::Linear { slope } => (slope * zeta).min(1.0),
            SmallBall::Constant { value } => value,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            SmallBall::Linear { slope } => check_positive("slope", slope),
            SmallBall::Constant { value } if (0.0..=1.0).contains(&value) => Ok(()),
            SmallBall::Constant { value } => Err(Error::domain("small_ball", value, "must lie in [0, 1]")),
        }
    }
}

pub fn default_zeta_grid() -> Grid {
    Grid::log(1e-4, 0.5, 2000).expect("valid default grid")
}

pub fn default_gamma_grid() -> Grid {
    Grid::linear(0.0, 4.0, 800).expect("valid default grid")
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BayesConfig {
    pub small_ball: SmallBall,
    /// `I(Θ; X^n)` or `I_γ(Θ; X^n)` in nats, depending on the bound.
    pub info_value: f64,
    pub n: usize,
    pub params: PrivacyParams,
    pub zeta_grid: Grid,
    pub gamma_grid: Grid,
}

impl BayesConfig {
    pub fn new(small_ball: SmallBall, info_value: f64, n: usize, params: PrivacyParams) -> Self {
        Self {
            small_ball,
            info_value,
            n,
            params,
            zeta_grid: default_zeta_grid(),
            gamma_grid: default_gamma_grid(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.small_ball.validate()?;
        check_nonnegative("info_value", self.info_value)?;
        check_n(self.n)?;
        self.zeta_grid.validate()?;
        self.gamma_grid.validate()
    }
}

fn zeta_sup(
    name: &str,
    zeta_grid: &Grid,
    inputs: serde_json::Value,
    mut bracket: impl FnMut(f64) -> Option<f64>,
) -> BoundReport {
    let mut any_negative = false;
    let best = grid_max(&zeta_grid.points(), |z| match bracket(z) {
        Some(b) => {
            any_negative |= b < 0.0;
            z * b.max(0.0)
        }
        None => f64::NAN,
    });
    match best {
        Ok(m) => BoundReport::new(name, m.value, inputs)
            .with_witness("zeta", m.argmax)
            .flag(BoundFlag::Vacuous, m.value == 0.0 && any_negative),
        Err(_) => BoundReport::new(name, 0.0, inputs).flag(BoundFlag::EmptyFeasibleGrid, true),
    }
}

fn xu_raginsky_bracket(small_ball: SmallBall, info: f64) -> impl Fn(f64) -> Option<f64> {
    move |z| {
        let l = small_ball.eval(z);
        (l < 1.0).then(|| 1.0 - (info + LN_2) / (1.0 / l).ln())
    }
}

/// `sup_ζ ζ (1 − (I + ln 2) / ln(1/L(ζ)))` without privacy.
pub fn xu_raginsky(small_ball: SmallBall, mi: f64, zeta_grid: &Grid) -> Result<BoundReport> {
    small_ball.validate()?;
    check_nonnegative("mi", mi)?;
    zeta_grid.validate()?;
    let inputs = json!({"small_ball": small_ball, "mi": mi, "zeta_grid": zeta_grid});
    Ok(zeta_sup("xu_raginsky", zeta_grid, inputs, xu_raginsky_bracket(small_ball, mi)))
}

/// Private mutual-information Bayes bound with `I` scaled by `φ_n`.
pub fn bayes_xu_raginsky_private(cfg: &BayesConfig) -> Result<BoundReport> {
    cfg.validate()?;
    let pn = phi_n(cfg.params, cfg.n);
    let bracket = xu_raginsky_bracket(cfg.small_ball, pn * cfg.info_value);
    Ok(zeta_sup("bayes_mi", &cfg.zeta_grid, json!(cfg), bracket).flag(BoundFlag::Trivial, pn == 0.0))
}

/// `E_γ`-information Bayes bound at `γ = e^ε`:
/// `sup_ζ ζ (1 − c I_γ − e^ε L(ζ))` with `c = δ` for one observation and
/// `c = φ_n` otherwise.
pub fn bayes_egamma_lb(cfg: &BayesConfig) -> Result<BoundReport> {
    cfg.validate()?;
    let c = if cfg.n == 1 { cfg.params.delta() } else { phi_n(cfg.params, cfg.n) };
    let gamma = cfg.params.gamma();
    let (sb, info) = (cfg.small_ball, cfg.info_value);
    let report = zeta_sup("bayes_egamma", &cfg.zeta_grid, json!(cfg), |z| {
        Some(1.0 - c * info - gamma * sb.eval(z))
    });
    Ok(report.with_witness("coefficient", c))
}

/// `sup_{ζ, γ} ζ (1 − I_γ − γ L(ζ) − (1 − γ)_+)` with `I_γ` supplied by the
/// caller; `info_value` and `params` of `cfg` are not used.
pub fn bayes_gamma_opt_lb(
    cfg: &BayesConfig,
    mut igamma: impl FnMut(f64) -> Result<f64>,
) -> Result<BoundReport> {
    cfg.validate()?;
    let zetas = cfg.zeta_grid.points();
    let gammas = cfg.gamma_grid.points();
    let info: Vec<f64> = gammas.iter().map(|&g| igamma(g)).collect::<Result<_>>()?;
    let small: Vec<f64> = zetas.iter().map(|&z| cfg.small_ball.eval(z)).collect();
    let mut any_negative = false;
    let best = grid_max_2d(&zetas, &gammas, |i, j| {
        let g = gammas[j];
        let b = 1.0 - info[j] - g * small[i] - (1.0 - g).max(0.0);
        any_negative |= b < 0.0;
        zetas[i] * b.max(0.0)
    })?;
    Ok(BoundReport::new("bayes_gammaopt", best.value, json!(cfg))
        .with_witness("zeta", best.argmax.0)
        .with_witness("gamma", best.argmax.1)
        .with_witness("igamma", info[best.index.1])
        .flag(BoundFlag::Vacuous, best.value == 0.0 && any_negative))
}

/// Lower bound `−φ(ε, δ) D_KL(P_0 ‖ P_1)` on the type-II error exponent.
pub fn ht_exponent(kl_p0_p1: f64, params: PrivacyParams) -> Result<f64> {
    check_nonnegative("kl", kl_p0_p1)?;
    Ok(-phi(params) * kl_p0_p1)
}

/// Cap `φ(ε, δ) H(X)` on the information any `(ε, δ)`-LDP release can carry.
pub fn mi_cap(h_x: f64, params: PrivacyParams) -> Result<f64> {
    check_nonnegative("entropy", h_x)?;
    Ok(phi(params) * h_x)
}
