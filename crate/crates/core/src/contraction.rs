//! Contraction coefficients of kernels and the closed-form bounds on them.
//!
//! For `γ ≥ 1` the `E_γ` contraction coefficient of a kernel is attained at
//! a pair of point masses, so `η_γ(K) = max_{x,x'} E_γ(K(·|x)‖K(·|x'))`.
//! At `γ = 1` this is Dobrushin's coefficient `η_TV`. Any kernel that is
//! `(ε, δ)`-LDP contracts every f-divergence by at least
//! `φ(ε, δ) = 1 − (1 − δ)e^{−ε}`, and its n-fold tensor power by
//! `φ_n(ε, δ) = 1 − (1 − φ)^n`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::dist::egamma_rows;
use crate::error::{Error, Result};
use crate::kernel::Kernel;

/// Privacy parameters `(ε, δ)` with `ε ≥ 0` and `δ ∈ [0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrivacyParams {
    epsilon: f64,
    delta: f64,
}

impl PrivacyParams {
    pub fn new(epsilon: f64, delta: f64) -> Result<Self> {
        if !(epsilon >= 0.0) {
            return Err(Error::domain("epsilon", epsilon, "must be >= 0"));
        }
        if !(0.0..=1.0).contains(&delta) {
            return Err(Error::domain("delta", delta, "must lie in [0, 1]"));
        }
        Ok(Self { epsilon, delta })
    }

    /// Pure `ε`-LDP, i.e. `δ = 0`.
    pub fn pure(epsilon: f64) -> Result<Self> {
        Self::new(epsilon, 0.0)
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// `γ = e^ε`.
    pub fn gamma(&self) -> f64 {
        self.epsilon.exp()
    }
}

/// `φ(ε, δ) = 1 − (1 − δ)e^{−ε}`.
pub fn phi(params: PrivacyParams) -> f64 {
    1.0 - (1.0 - params.delta) * (-params.epsilon).exp()
}

/// `φ_n(ε, δ) = 1 − e^{−nε}(1 − δ)^n`, computed as `1 − (1 − φ)^n`.
pub fn phi_n(params: PrivacyParams, n: usize) -> f64 {
    let keep = 1.0 - phi(params);
    1.0 - keep.powi(n.min(i32::MAX as usize) as i32)
}

/// Result of the two-point scan for `η_γ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContractionReport {
    pub eta_gamma: f64,
    pub gamma: f64,
    pub eta_tv: f64,
    /// Ordered input pair `(x, x')` achieving `η_γ`; the lexicographically
    /// smallest pair on ties.
    pub argmax_pair: (usize, usize),
    pub upper_bounds: BTreeMap<String, f64>,
}

fn two_point_max(k: &Kernel, gamma: f64) -> (f64, (usize, usize)) {
    let mut best = (f64::NEG_INFINITY, (0, 0));
    for x in 0..k.input_size() {
        for x2 in 0..k.input_size() {
            let v = egamma_rows(k.row(x).probs(), k.row(x2).probs(), gamma);
            if v > best.0 {
                best = (v, (x, x2));
            }
        }
    }
    best
}

/// `η_γ(K)` by scanning all ordered input pairs, `γ ≥ 1`.
pub fn eta_gamma_two_point(k: &Kernel, gamma: f64) -> Result<ContractionReport> {
    if !(gamma >= 1.0) || !gamma.is_finite() {
        return Err(Error::domain("gamma", gamma, "two-point formula needs gamma >= 1"));
    }
    let (eta_gamma, argmax_pair) = two_point_max(k, gamma);
    let eta_tv = eta_tv_dobrushin(k);
    let mut upper_bounds = BTreeMap::new();
    upper_bounds.insert(
        "eta_tv_from_eta_gamma".to_owned(),
        1.0 - (1.0 - eta_gamma) / gamma,
    );
    Ok(ContractionReport {
        eta_gamma,
        gamma,
        eta_tv,
        argmax_pair,
        upper_bounds,
    })
}

/// Dobrushin's coefficient `max_{x,x'} TV(K(·|x), K(·|x'))`.
pub fn eta_tv_dobrushin(k: &Kernel) -> f64 {
    let mut best: f64 = 0.0;
    for a in k.rows() {
        for b in k.rows() {
            let tv: f64 = a.probs().iter().zip(b.probs()).map(|(p, q)| (p - q).abs()).sum();
            best = best.max(0.5 * tv);
        }
    }
    best
}

/// `η_γ` over a grid of `γ ≥ 1` values, as `(γ, η_γ)` rows.
pub fn eta_gamma_curve(k: &Kernel, gammas: &[f64]) -> Result<Vec<(f64, f64)>> {
    gammas
        .iter()
        .map(|&g| eta_gamma_two_point(k, g).map(|r| (g, r.eta_gamma)))
        .collect()
}

/// Upper bound `η_TV ≤ 1 − (1 − η_γ)/γ` for `γ ≥ 1`.
pub fn eta_tv_from_eta_gamma(eta_gamma: f64, gamma: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&eta_gamma) {
        return Err(Error::domain("eta_gamma", eta_gamma, "must lie in [0, 1]"));
    }
    if !(gamma >= 1.0) {
        return Err(Error::domain("gamma", gamma, "must be >= 1"));
    }
    Ok(1.0 - (1.0 - eta_gamma) / gamma)
}

/// Universal bound `η_f(K) ≤ φ(ε, δ)` for `(ε, δ)`-LDP kernels.
pub fn eta_f_upper_ldp(params: PrivacyParams) -> f64 {
    phi(params)
}

/// `η_f(K^{⊗n}) ≤ φ_n(ε, δ)` for `(ε, δ)`-LDP kernels.
pub fn eta_f_tensor_upper(params: PrivacyParams, n: usize) -> f64 {
    phi_n(params, n)
}

/// `η_KL(BSC(ω)) = (1 − 2ω)²`.
///
/// Sometimes printed as `1 − 2ω²`; substituting `ω = 1/(1 + e^ε)` shows
/// only the squared form is consistent with [`eta_kl_randomized_response`].
pub fn eta_kl_bsc(omega: f64) -> f64 {
    (1.0 - 2.0 * omega).powi(2)
}

/// `η_KL` of binary randomized response, `((e^ε − 1)/(e^ε + 1))²`.
pub fn eta_kl_randomized_response(epsilon: f64) -> f64 {
    (epsilon / 2.0).tanh().powi(2)
}
