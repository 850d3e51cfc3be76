//! The Dicke Hamiltonian with an optional symmetry-breaking field,
//!
//! ```text
//! H_ε = Δ Jz + Ω a†a + λ Jx (a + a†) − ε Jx,
//! ```
//!
//! and its parity operator `Π = exp(iπ (a†a + Jz + j))`.

use crate::error::{Error, Result};
use crate::hilbert::{boson_matrices, kron, spin_matrices, BasisSpec, SparseOperator, SpinLength};

/// Default symmetry-breaking field in units of `Δ`.
pub const DEFAULT_EPSILON: f64 = 1e-4;

/// Physical parameters of one Dicke instance.
///
/// The coupling is stored as the dimensionless `κ = 2jλ²/(ΔΩ)`; `λ` is
/// derived on demand.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModelParams {
    pub spin: SpinLength,
    pub delta: f64,
    pub omega: f64,
    pub kappa: f64,
    pub epsilon: f64,
}

impl ModelParams {
    /// Parameters from the dimensionless coupling, with `ε = 1e-4·Δ`.
    pub fn with_kappa(spin: SpinLength, delta: f64, omega: f64, kappa: f64) -> Result<Self> {
        let p = ModelParams {
            spin,
            delta,
            omega,
            kappa,
            epsilon: DEFAULT_EPSILON * delta,
        };
        p.validate()?;
        Ok(p)
    }

    /// Parameters from the bare coupling `λ`; requires `Ω > 0`.
    pub fn with_lambda(spin: SpinLength, delta: f64, omega: f64, lambda: f64) -> Result<Self> {
        let kappa = crate::analytics::kappa_from_lambda(spin.j(), delta, omega, lambda)?;
        Self::with_kappa(spin, delta, omega, kappa)
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Self {
        self.epsilon = epsilon;
        self
    }

    pub fn j(&self) -> f64 {
        self.spin.j()
    }

    /// Bare spin-boson coupling `λ = √(κΔΩ/(2j))`.
    pub fn lambda(&self) -> f64 {
        (self.kappa * self.delta * self.omega / (2.0 * self.j())).sqrt()
    }

    pub fn omega_over_delta(&self) -> f64 {
        self.omega / self.delta
    }

    fn validate(&self) -> Result<()> {
        if !(self.delta > 0.0) {
            return Err(Error::InvalidParameter(format!("delta must be positive, got {}", self.delta)));
        }
        if !(self.omega >= 0.0) {
            return Err(Error::InvalidParameter(format!("omega must be non-negative, got {}", self.omega)));
        }
        if !(self.kappa >= 0.0) || !self.kappa.is_finite() {
            return Err(Error::InvalidParameter(format!("kappa must be finite and non-negative, got {}", self.kappa)));
        }
        Ok(())
    }

    /// A quantum simulation needs a finite oscillator frequency.
    pub(crate) fn check_quantum(&self) -> Result<()> {
        self.validate()?;
        if !(self.omega > 0.0) {
            return Err(Error::InvalidParameter(
                "omega must be positive for an exact-diagonalization run".into(),
            ));
        }
        if !self.epsilon.is_finite() {
            return Err(Error::InvalidParameter(format!("epsilon must be finite, got {}", self.epsilon)));
        }
        Ok(())
    }
}

/// `Jx ⊗ 1` on the composite space.
pub fn jx_operator(basis: &BasisSpec) -> SparseOperator {
    kron(&spin_matrices(basis.spin).jx, &SparseOperator::identity(basis.boson_levels()))
}

/// `Jz ⊗ 1` on the composite space.
pub fn jz_operator(basis: &BasisSpec) -> SparseOperator {
    kron(&spin_matrices(basis.spin).jz, &SparseOperator::identity(basis.boson_levels()))
}

/// Builds `H_ε` on the given truncated basis.
pub fn build_hamiltonian(p: &ModelParams, basis: &BasisSpec) -> Result<SparseOperator> {
    p.check_quantum()?;
    if basis.spin != p.spin {
        return Err(Error::SpinMismatch {
            basis: basis.spin.two_j(),
            model: p.spin.two_j(),
        });
    }
    let spin = spin_matrices(basis.spin);
    let boson = boson_matrices(basis.boson_cutoff)?;
    let id_spin = SparseOperator::identity(basis.spin.dim());
    let id_boson = SparseOperator::identity(basis.boson_levels());

    let spin_part = &spin.jz.scaled(p.delta) - &spin.jx.scaled(p.epsilon);
    let h = &(&kron(&spin_part, &id_boson) + &kron(&id_spin, &boson.n.scaled(p.omega)))
        + &kron(&spin.jx, &boson.q().scaled(p.lambda()));
    debug_assert!(h.is_symmetric());
    Ok(h)
}

/// Eigenvalues of `Π` on the basis states: `(−1)^(n + s)` with `s = m + j`.
pub fn parity_diagonal(basis: &BasisSpec) -> Vec<f64> {
    (0..basis.spin.dim())
        .flat_map(|s| (0..basis.boson_levels()).map(move |n| if (s + n) % 2 == 0 { 1.0 } else { -1.0 }))
        .collect()
}

/// `⟨Π⟩` for a real state vector.
pub fn parity_expectation(basis: &BasisSpec, v: &[f64]) -> f64 {
    parity_diagonal(basis).iter().zip(v).map(|(p, x)| p * x * x).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eigensolver::dense_ground;

    fn half() -> SpinLength {
        SpinLength::HALF
    }

    #[test]
    fn decoupled_limit_is_diagonal() {
        let p = ModelParams::with_kappa(half(), 1.0, 1.0, 0.0).unwrap().with_epsilon(0.0);
        let basis = BasisSpec::new(half(), 2).unwrap();
        let h = build_hamiltonian(&p, &basis).unwrap();
        assert_eq!(h, SparseOperator::diagonal(&h.diagonal_values()));
        let min = h.diagonal_values().into_iter().fold(f64::INFINITY, f64::min);
        assert_eq!(min, -0.5);
    }

    #[test]
    fn weak_coupling_ground_energy() {
        // Dense oracle on the 42-dimensional truncation; second-order shift
        // with ⟨↑,1|λ q Jx|↓,0⟩ = λ/2 is −λ²/(4(Δ+Ω)).
        let p = ModelParams::with_lambda(half(), 1.0, 1.0, 0.1).unwrap().with_epsilon(0.0);
        let basis = BasisSpec::new(half(), 20).unwrap();
        let h = build_hamiltonian(&p, &basis).unwrap();
        let (e, _) = dense_ground(&h).unwrap();
        assert!((e - (-0.501_250_781_738_280_6)).abs() < 1e-12);
        assert!((e - (-0.5 - 0.01 / 8.0)).abs() < 1e-5);
    }

    #[test]
    fn parity_commutes_with_unbiased_hamiltonian() {
        let spin = SpinLength::new(3).unwrap();
        let p = ModelParams::with_kappa(spin, 1.0, 0.7, 1.4).unwrap().with_epsilon(0.0);
        let basis = BasisSpec::new(spin, 12).unwrap();
        let h = build_hamiltonian(&p, &basis).unwrap();
        let pi = SparseOperator::diagonal(&parity_diagonal(&basis));
        let comm = &(&h * &pi) - &(&pi * &h);
        assert_eq!(comm.nnz(), 0);
        // with the field the symmetry is broken
        let h_eps = build_hamiltonian(&p.with_epsilon(0.1), &basis).unwrap();
        assert!((&(&h_eps * &pi) - &(&pi * &h_eps)).nnz() > 0);
    }

    #[test]
    fn parity_pattern_and_involution() {
        let basis = BasisSpec::new(half(), 1).unwrap();
        let pi = parity_diagonal(&basis);
        assert_eq!(pi, vec![1.0, -1.0, -1.0, 1.0]);
        assert!(pi.iter().all(|x| x * x == 1.0));
    }

    #[test]
    fn rejects_bad_inputs() {
        let p = ModelParams::with_kappa(half(), 1.0, 1.0, 0.5).unwrap();
        let wrong = BasisSpec::new(SpinLength::new(2).unwrap(), 4).unwrap();
        assert!(matches!(build_hamiltonian(&p, &wrong), Err(Error::SpinMismatch { .. })));
        assert!(BasisSpec::new(half(), 0).is_err());
        assert!(ModelParams::with_kappa(half(), 0.0, 1.0, 0.5).is_err());
        assert!(ModelParams::with_kappa(half(), 1.0, 1.0, -0.1).is_err());
        let classical = ModelParams::with_kappa(half(), 1.0, 0.0, 0.5).unwrap();
        let basis = BasisSpec::new(half(), 4).unwrap();
        assert!(build_hamiltonian(&classical, &basis).is_err());
    }

    #[test]
    fn lambda_kappa_consistency() {
        let spin = SpinLength::new(10).unwrap();
        let p = ModelParams::with_kappa(spin, 1.0, 0.01, 2.0).unwrap();
        let q = ModelParams::with_lambda(spin, 1.0, 0.01, p.lambda()).unwrap();
        assert!((q.kappa - 2.0).abs() < 1e-14);
        assert_eq!(p.epsilon, 1e-4);
    }
}
