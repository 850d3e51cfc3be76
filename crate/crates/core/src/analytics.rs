//! Closed-form results: mean-field transition, classical-oscillator and
//! fast-oscillator fluctuations, entanglement entropies, the Rabi
//! fast-oscillator renormalization and coherent-state overlaps.
//!
//! Functions with a divergence at the critical coupling `κ = 1` return
//! `f64::INFINITY` there, set explicitly rather than by dividing by zero.

use std::f64::consts::LN_2;

use crate::error::{Error, Result};

/// Which of the two degenerate symmetry-broken minima to report above
/// threshold.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Branch {
    Positive,
    Negative,
}

impl Branch {
    pub fn sign(self) -> f64 {
        match self {
            Branch::Positive => 1.0,
            Branch::Negative => -1.0,
        }
    }
}

/// Mean-field ground state at one coupling.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MfPoint {
    pub kappa: f64,
    pub theta_star: f64,
    pub alpha_star: f64,
    pub energy: f64,
    pub jx: f64,
    pub chi: f64,
    pub branch: Branch,
}

/// Assembles the mean-field point for spin length `j`, level splitting
/// `delta` and oscillator frequency `omega > 0`.
pub fn mf_point(kappa: f64, j: f64, delta: f64, omega: f64, branch: Branch) -> Result<MfPoint> {
    let lambda = lambda_from_kappa(j, delta, omega, kappa)?;
    let theta = mf_theta(kappa, branch);
    Ok(MfPoint {
        kappa,
        theta_star: theta,
        alpha_star: mf_alpha(theta, j, lambda, omega)?,
        energy: mf_energy(theta, kappa, j, delta),
        jx: mf_order_parameter(kappa, j, branch),
        chi: mf_susceptibility(kappa),
        branch,
    })
}

/// Energy functional `E(θ) = −jΔ (cos θ + (κ/2) sin²θ)`.
pub fn mf_energy(theta: f64, kappa: f64, j: f64, delta: f64) -> f64 {
    let s = theta.sin();
    -j * delta * (theta.cos() + 0.5 * kappa * s * s)
}

/// Minimizing angle: zero up to `κ = 1`, `±arccos(1/κ)` above.
pub fn mf_theta(kappa: f64, branch: Branch) -> f64 {
    if kappa <= 1.0 {
        0.0
    } else {
        branch.sign() * (1.0 / kappa).acos()
    }
}

/// Oscillator displacement `α = −jλ sin θ / Ω`.
pub fn mf_alpha(theta: f64, j: f64, lambda: f64, omega: f64) -> Result<f64> {
    if !(omega > 0.0) {
        return Err(Error::InvalidParameter(format!("omega must be positive, got {omega}")));
    }
    Ok(-j * lambda * theta.sin() / omega)
}

/// `α*²` in terms of `κ`: `jκ/(2Ω/Δ) · sin²θ*`.
pub fn mf_alpha_squared(kappa: f64, j: f64, omega_over_delta: f64) -> f64 {
    if kappa <= 1.0 {
        return 0.0;
    }
    j * kappa / (2.0 * omega_over_delta) * (1.0 - 1.0 / (kappa * kappa))
}

/// `⟨Jx⟩`: zero below threshold, `±j√(1 − 1/κ²)` above.
pub fn mf_order_parameter(kappa: f64, j: f64, branch: Branch) -> f64 {
    if kappa <= 1.0 {
        0.0
    } else {
        branch.sign() * j * (1.0 - 1.0 / (kappa * kappa)).sqrt()
    }
}

/// Dimensionless susceptibility: `1/(1−κ)` below, `1/(κ(κ²−1))` above.
pub fn mf_susceptibility(kappa: f64) -> f64 {
    if kappa == 1.0 {
        f64::INFINITY
    } else if kappa < 1.0 {
        1.0 / (1.0 - kappa)
    } else {
        1.0 / (kappa * (kappa * kappa - 1.0))
    }
}

/// Oscillator position variance of the effective bosonic models:
/// `(1−κ)^(−1/2)` below, `(1−1/κ²)^(−1/2)` above.
pub fn co_oscillator_variance(kappa: f64) -> f64 {
    if kappa == 1.0 {
        f64::INFINITY
    } else if kappa < 1.0 {
        (1.0 - kappa).powf(-0.5)
    } else {
        (1.0 - 1.0 / (kappa * kappa)).powf(-0.5)
    }
}

/// `ln 2 − ½(1−x) ln(1−x) − ½(1+x) ln(1+x)`, the entropy of a balanced
/// two-branch superposition whose branches overlap by `x`, with
/// `0·ln 0 = 0`.
pub fn two_branch_entropy(x: f64) -> f64 {
    let xlnx = |u: f64| if u <= 0.0 { 0.0 } else { u * u.ln() };
    LN_2 - 0.5 * xlnx(1.0 - x) - 0.5 * xlnx(1.0 + x)
}

/// Spin-oscillator entropy in the classical-oscillator limit: zero up to
/// threshold, two-branch entropy with overlap `κ^(−2j)` above.
pub fn co_entropy(kappa: f64, j: f64) -> f64 {
    if kappa <= 1.0 {
        return 0.0;
    }
    two_branch_entropy(kappa.powf(-2.0 * j))
}

/// Logarithmically divergent part `−¼ ln|1−κ|` of the classical-spin-limit
/// entropy; the additive constant is not modelled.
pub fn cs_entropy_divergence(kappa: f64) -> f64 {
    if kappa == 1.0 {
        return f64::INFINITY;
    }
    -0.25 * (1.0 - kappa).abs().ln()
}

/// Spin variance for `j → ∞` at large oscillator frequency:
/// `κ²/(8(1−κ))` below, `1/(8κ²(κ²−1))` above.
pub fn fo_spin_variance(kappa: f64) -> f64 {
    if kappa == 1.0 {
        f64::INFINITY
    } else if kappa < 1.0 {
        kappa * kappa / (8.0 * (1.0 - kappa))
    } else {
        1.0 / (8.0 * kappa * kappa * (kappa * kappa - 1.0))
    }
}

/// Renormalized spin splitting `Δ̃ = e^(−ξ²/2) Δ` of the Rabi model in the
/// fast-oscillator limit at fixed `ξ = λ/Ω`.
pub fn rabi_renormalized_delta(xi: f64, delta: f64) -> f64 {
    (-0.5 * xi * xi).exp() * delta
}

/// `χ_ren = 1/Δ̃ = e^(ξ²/2)/Δ`.
pub fn rabi_fo_susceptibility(xi: f64, delta: f64) -> f64 {
    (0.5 * xi * xi).exp() / delta
}

/// Closed-form entropy of the transformed Rabi ground state, the two-branch
/// entropy with overlap `e^(−2ξ²)`.
///
/// Exact diagonalization with `λ(a+a†)Jx` and `Jx = σx/2` instead converges
/// to overlap `e^(−ξ²/2)` (branches displaced by `±ξ/2`); see
/// [`rabi_displaced_branch_entropy`].
pub fn rabi_fo_entropy(xi: f64) -> f64 {
    two_branch_entropy((-2.0 * xi * xi).exp())
}

/// Two-branch entropy for oscillator branches `|±ξ/2⟩`, overlap
/// `e^(−ξ²/2)`. This is the large-`Ω` limit of the Rabi ground state built
/// with spin-one-half operators.
pub fn rabi_displaced_branch_entropy(xi: f64) -> f64 {
    two_branch_entropy((-0.5 * xi * xi).exp())
}

/// `⟨θ|χ⟩ = cos^(2j)((θ−χ)/2)` for real spin coherent states.
pub fn spin_coherent_overlap(theta: f64, chi: f64, j: f64) -> f64 {
    (0.5 * (theta - chi)).cos().powf(2.0 * j)
}

/// `κ = 2jλ²/(ΔΩ)`.
pub fn kappa_from_lambda(j: f64, delta: f64, omega: f64, lambda: f64) -> Result<f64> {
    check_positive(delta, omega)?;
    if !(lambda >= 0.0) {
        return Err(Error::InvalidParameter(format!("lambda must be non-negative, got {lambda}")));
    }
    Ok(2.0 * j * lambda * lambda / (delta * omega))
}

/// `λ = √(κΔΩ/(2j))`.
pub fn lambda_from_kappa(j: f64, delta: f64, omega: f64, kappa: f64) -> Result<f64> {
    check_positive(delta, omega)?;
    if !(kappa >= 0.0) {
        return Err(Error::InvalidParameter(format!("kappa must be non-negative, got {kappa}")));
    }
    Ok((kappa * delta * omega / (2.0 * j)).sqrt())
}

fn check_positive(delta: f64, omega: f64) -> Result<()> {
    if !(delta > 0.0 && omega > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "delta and omega must be positive, got delta = {delta}, omega = {omega}"
        )));
    }
    Ok(())
}
