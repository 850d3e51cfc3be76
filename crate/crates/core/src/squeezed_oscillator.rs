//! The squeezed oscillator `H = a†a + β (a + a†)²`.
//!
//! A Bogoliubov rotation with `tanh 2σ = 2β/(1+2β)` maps it to
//! `√(1+4β) b†b + E₀`, which is bounded from below only for `β > −1/4`.
//! Every effective bosonic model in this crate is this oscillator times a
//! frequency, possibly displaced.

use crate::eigensolver::dense_eigen;
use crate::error::{Error, Result};
use crate::hilbert::{boson_matrices, BosonMatrices, SparseOperator};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SqueezedSolution {
    pub beta: f64,
    /// Excitation energy `√(1+4β)`.
    pub gap: f64,
    /// `(√(1+4β) − 1)/2`, without any displacement term.
    pub ground_energy: f64,
    /// `⟨(a+a†)²⟩ − ⟨a+a†⟩² = 1/√(1+4β)`.
    pub q_variance: f64,
    /// `⟨(a†a)²⟩ − ⟨a†a⟩² = 2β²/(1+4β)`.
    pub n_variance: f64,
    /// Squeeze parameter, `tanh 2σ = 2β/(1+2β)`.
    pub sigma: f64,
}

impl SqueezedSolution {
    /// Variance of `i(a† − a)`, `√(1+4β)`; the ground state saturates
    /// `q_variance · p_variance = 1`.
    pub fn p_variance(&self) -> f64 {
        self.gap
    }
}

pub fn solve(beta: f64) -> Result<SqueezedSolution> {
    if !beta.is_finite() {
        return Err(Error::InvalidParameter(format!("beta must be finite, got {beta}")));
    }
    if beta <= -0.25 {
        return Err(Error::StabilityViolation(beta));
    }
    let gap = (1.0 + 4.0 * beta).sqrt();
    Ok(SqueezedSolution {
        beta,
        gap,
        ground_energy: 0.5 * (gap - 1.0),
        q_variance: 1.0 / gap,
        n_variance: 2.0 * beta * beta / (1.0 + 4.0 * beta),
        sigma: 0.5 * (2.0 * beta / (1.0 + 2.0 * beta)).atanh(),
    })
}

/// `a†a + β (a+a†)²` on `|0⟩ … |N_b⟩`.
///
/// `(a+a†)²` is formed from the truncated ladder operators, so its last
/// diagonal entry misses the `|N_b+1⟩` contribution; that only touches the
/// top level, which [`verify_against_truncation`] requires to be empty.
pub fn truncated_hamiltonian(beta: f64, cutoff: usize) -> Result<SparseOperator> {
    let b = boson_matrices(cutoff)?;
    let q = b.q();
    Ok(&b.n + &(&q * &q).scaled(beta))
}

/// Ground-state moments measured on a truncated Fock space.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OscillatorMoments {
    pub energy: f64,
    pub q_mean: f64,
    pub q_variance: f64,
    pub n_mean: f64,
    pub n_variance: f64,
}

/// Moments of a normalized Fock-space state.
pub fn oscillator_moments(b: &BosonMatrices, energy: f64, v: &[f64]) -> OscillatorMoments {
    let q = b.q();
    let qv = q.apply(v);
    let q_mean: f64 = v.iter().zip(&qv).map(|(a, b)| a * b).sum();
    let q2: f64 = qv.iter().map(|x| x * x).sum();
    let (n_mean, n2) = v.iter().enumerate().fold((0.0, 0.0), |(m1, m2), (k, x)| {
        let p = x * x;
        (m1 + k as f64 * p, m2 + (k * k) as f64 * p)
    });
    OscillatorMoments {
        energy,
        q_mean,
        q_variance: q2 - q_mean * q_mean,
        n_mean,
        n_variance: n2 - n_mean * n_mean,
    }
}

#[derive(Clone, Copy, Debug)]
pub struct TruncationReport {
    pub closed: SqueezedSolution,
    pub numeric: OscillatorMoments,
    pub tail_weight: f64,
    /// Largest absolute deviation among energy, `q` and `n` variances.
    pub max_error: f64,
}

/// Dense-diagonalizes the truncated oscillator and compares its ground
/// state with the closed forms.
pub fn verify_against_truncation(beta: f64, cutoff: usize) -> Result<TruncationReport> {
    if cutoff < 64 {
        return Err(Error::InvalidParameter(format!("cutoff must be at least 64, got {cutoff}")));
    }
    let closed = solve(beta)?;
    let h = truncated_hamiltonian(beta, cutoff)?;
    let (values, vectors) = dense_eigen(h.to_dense());
    let v: Vec<f64> = vectors.column(0).iter().copied().collect();
    let levels = cutoff + 1;
    let top = ((levels as f64) * 0.05).ceil() as usize;
    let tail_weight: f64 = v[levels - top..].iter().map(|x| x * x).sum();
    if tail_weight > 1e-10 {
        return Err(Error::TruncationTooSmall(tail_weight));
    }
    let numeric = oscillator_moments(&boson_matrices(cutoff)?, values[0], &v);
    let max_error = [
        numeric.energy - closed.ground_energy,
        numeric.q_variance - closed.q_variance,
        numeric.n_variance - closed.n_variance,
    ]
    .iter()
    .fold(0.0f64, |m, d| m.max(d.abs()));
    Ok(TruncationReport {
        closed,
        numeric,
        tail_weight,
        max_error,
    })
}
