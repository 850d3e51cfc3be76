//! Ground-state diagnostics: order parameter, susceptibility, oscillator and
//! rotation-invariant spin variances, reduced density matrices and the
//! spin-oscillator entanglement entropy.
//!
//! States are read as a `(2j+1) × (N_b+1)` matrix `v[s, n]` in the
//! spin-major layout of [`BasisSpec`].

use nalgebra::DMatrix;

use crate::dicke::{parity_expectation, ModelParams};
use crate::eigensolver::{converge_cutoff, solve_ground, suggested_start_cutoff, GroundState, LanczosConfig, SolverConfig};
use crate::error::{Error, Result};
use crate::hilbert::{spin_matrices, BasisSpec, SparseOperator};

/// Eigenvalues of reduced density matrices below this are treated as zero.
const CLIP: f64 = 1e-12;

/// One row of measurements at a single parameter point.
#[derive(Clone, Debug, PartialEq)]
pub struct ObservableRecord {
    pub kappa: f64,
    pub lambda: f64,
    pub two_j: u32,
    pub omega_over_delta: f64,
    pub epsilon: f64,
    pub boson_cutoff: usize,
    pub energy: f64,
    pub jx: f64,
    pub jx_over_j: f64,
    pub chi: f64,
    pub delta_q: f64,
    pub delta_j: f64,
    pub entropy_nats: f64,
    pub parity: f64,
    pub occupancy: f64,
}

impl ObservableRecord {
    /// Measures everything except `χ`, which costs extra solves and is
    /// passed in.
    pub fn measure(gs: &GroundState, chi: f64) -> ObservableRecord {
        let (jx, jx_over_j) = order_parameter(gs);
        ObservableRecord {
            kappa: gs.params.kappa,
            lambda: gs.params.lambda(),
            two_j: gs.params.spin.two_j(),
            omega_over_delta: gs.params.omega_over_delta(),
            epsilon: gs.params.epsilon,
            boson_cutoff: gs.basis.boson_cutoff,
            energy: gs.energy,
            jx,
            jx_over_j,
            chi,
            delta_q: oscillator_variance(gs),
            delta_j: spin_variance(gs),
            entropy_nats: entanglement_entropy(gs),
            parity: parity_expectation(&gs.basis, &gs.vector),
            occupancy: occupancy(gs),
        }
    }
}

/// `vᵀ A v`.
pub fn expectation(op: &SparseOperator, state: &[f64]) -> Result<f64> {
    op.expectation(state)
}

/// Applies a spin-space operator to every boson level of a composite state.
fn apply_spin(op: &SparseOperator, v: &[f64], levels: usize) -> Vec<f64> {
    let mut out = vec![0.0; v.len()];
    for s in 0..op.dim() {
        let dst = &mut out[s * levels..(s + 1) * levels];
        for (c, a) in op.row(s) {
            let src = &v[c * levels..(c + 1) * levels];
            dst.iter_mut().zip(src).for_each(|(d, x)| *d += a * x);
        }
    }
    out
}

/// Applies `a + a†` to every spin block.
fn apply_q(v: &[f64], levels: usize) -> Vec<f64> {
    let mut out = vec![0.0; v.len()];
    let sq: Vec<f64> = (0..levels).map(|n| (n as f64).sqrt()).collect();
    for (dst, src) in out.chunks_mut(levels).zip(v.chunks(levels)) {
        for n in 0..levels {
            let mut acc = 0.0;
            if n + 1 < levels {
                acc += sq[n + 1] * src[n + 1];
            }
            if n > 0 {
                acc += sq[n] * src[n - 1];
            }
            dst[n] = acc;
        }
    }
    out
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `⟨Jx⟩` and `⟨Jx⟩/j`.
pub fn order_parameter(gs: &GroundState) -> (f64, f64) {
    let jx = jx_expectation(&gs.basis, &gs.vector);
    (jx, jx / gs.params.j())
}

fn jx_expectation(basis: &BasisSpec, v: &[f64]) -> f64 {
    let spin = spin_matrices(basis.spin);
    dot(v, &apply_spin(&spin.jx, v, basis.boson_levels()))
}

/// Finite-difference settings for [`susceptibility`], in units of `Δ`.
///
/// Above threshold the two field signs select different symmetry-broken
/// branches, so the difference is centered on a positive field rather than
/// on zero: both solves stay on the `⟨Jx⟩ > 0` branch.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SusceptibilityConfig {
    /// Center field `ε_c / Δ`.
    pub field: f64,
    /// Half step `h / Δ`; solves run at `ε_c ± h`.
    pub step: f64,
    /// Lanczos residual bound `‖Hv − Ev‖/Δ` for the two solves. The
    /// difference of `⟨Jx⟩` is of order `jχh/Δ`, so eigenvector errors of
    /// order residual/gap must stay well below it.
    pub residual: f64,
}

impl Default for SusceptibilityConfig {
    fn default() -> Self {
        SusceptibilityConfig {
            field: 1e-4,
            step: 0.5e-4,
            residual: 1e-11,
        }
    }
}

/// `χ = (Δ/j) [⟨Jx⟩(ε_c+h) − ⟨Jx⟩(ε_c−h)] / (2h)` on a fixed truncation,
/// warm-started from `warm` when given.
pub fn susceptibility_on_basis(
    p: &ModelParams,
    basis: &BasisSpec,
    solver: &SolverConfig,
    fd: &SusceptibilityConfig,
    warm: Option<&[f64]>,
) -> Result<(f64, bool)> {
    let center = fd.field * p.delta;
    let h = fd.step * p.delta;
    let lanczos = LanczosConfig {
        residual_tol: Some(fd.residual * p.delta),
        ..solver.lanczos.clone()
    };
    let lo = solve_ground(&p.with_epsilon(center - h), basis, &lanczos, warm)?;
    let hi = solve_ground(&p.with_epsilon(center + h), basis, &lanczos, Some(&lo.vector))?;
    let slope = (jx_expectation(basis, &hi.vector) - jx_expectation(basis, &lo.vector)) / (2.0 * h);
    Ok((p.delta / p.j() * slope, lo.converged && hi.converged))
}

/// Susceptibility with the boson cutoff converged at the center field.
/// `p.epsilon` is ignored. Returns an error-free value together with the
/// convergence flag of the inner solves.
pub fn susceptibility(p: &ModelParams, solver: &SolverConfig, fd: &SusceptibilityConfig) -> Result<(f64, bool)> {
    let center = p.with_epsilon(fd.field * p.delta);
    let gs = converge_cutoff(&center, suggested_start_cutoff(&center), solver)?;
    let (chi, ok) = susceptibility_on_basis(p, &gs.basis, solver, fd, Some(&gs.vector))?;
    Ok((chi, ok && gs.converged))
}

/// `Δq = ⟨(a+a†)²⟩ − ⟨a+a†⟩²`.
pub fn oscillator_variance(gs: &GroundState) -> f64 {
    let qv = apply_q(&gs.vector, gs.basis.boson_levels());
    let mean = dot(&gs.vector, &qv);
    dot(&qv, &qv) - mean * mean
}

/// `⟨a†a⟩`.
pub fn occupancy(gs: &GroundState) -> f64 {
    gs.vector
        .chunks(gs.basis.boson_levels())
        .flat_map(|block| block.iter().enumerate().map(|(n, x)| n as f64 * x * x))
        .sum()
}

/// Covariance matrix of `(Jx, Jz)` for a real state:
/// `[[Var Jx, Cov], [Cov, Var Jz]]`.
pub fn spin_covariance(gs: &GroundState) -> [[f64; 2]; 2] {
    let levels = gs.basis.boson_levels();
    let spin = spin_matrices(gs.basis.spin);
    let v = &gs.vector;
    let xv = apply_spin(&spin.jx, v, levels);
    let zv = apply_spin(&spin.jz, v, levels);
    let (x, z) = (dot(v, &xv), dot(v, &zv));
    let xz = dot(v, &apply_spin(&spin.jx, &zv, levels));
    let zx = dot(v, &apply_spin(&spin.jz, &xv, levels));
    // For real states ⟨[Jx, Jz]⟩ = −i⟨Jy⟩ vanishes.
    let j = gs.params.j();
    debug_assert!((xz - zx).abs() <= 1e-10 * (1.0 + j * j), "⟨JxJz⟩ = {xz}, ⟨JzJx⟩ = {zx}");
    let cov = xz - x * z;
    [[dot(&xv, &xv) - x * x, cov], [cov, dot(&zv, &zv) - z * z]]
}

/// Smaller eigenvalue of a symmetric 2×2 matrix.
fn smaller_eigenvalue(m: [[f64; 2]; 2]) -> f64 {
    let mean = 0.5 * (m[0][0] + m[1][1]);
    let half_diff = 0.5 * (m[0][0] - m[1][1]);
    mean - (half_diff * half_diff + m[0][1] * m[0][1]).sqrt()
}

/// Rotation-invariant spin variance: smallest eigenvalue of
/// [`spin_covariance`], clipped at zero.
pub fn spin_variance(gs: &GroundState) -> f64 {
    smaller_eigenvalue(spin_covariance(gs)).max(0.0)
}

/// Same as [`spin_variance`] for a bare spin state (no oscillator).
pub fn spin_variance_of(spin: crate::hilbert::SpinLength, v: &[f64]) -> f64 {
    let basis = BasisSpec {
        spin,
        boson_cutoff: 0,
    };
    let m = spin_matrices(spin);
    let xv = apply_spin(&m.jx, v, basis.boson_levels());
    let zv = apply_spin(&m.jz, v, basis.boson_levels());
    let (x, z) = (dot(v, &xv), dot(v, &zv));
    let cov = dot(&xv, &zv) - x * z;
    smaller_eigenvalue([[dot(&xv, &xv) - x * x, cov], [cov, dot(&zv, &zv) - z * z]]).max(0.0)
}

/// `ρ_s[s, s'] = Σ_n v[s, n] v[s', n]`.
pub fn reduced_spin_density(gs: &GroundState) -> DMatrix<f64> {
    let levels = gs.basis.boson_levels();
    let dim = gs.basis.spin.dim();
    let block = |s: usize| &gs.vector[s * levels..(s + 1) * levels];
    let mut rho = DMatrix::zeros(dim, dim);
    for s in 0..dim {
        for t in s..dim {
            let value = dot(block(s), block(t));
            rho[(s, t)] = value;
            rho[(t, s)] = value;
        }
    }
    rho
}

/// `ρ_b[n, n'] = Σ_s v[s, n] v[s, n']`; dense in the boson levels, so meant
/// for modest cutoffs.
pub fn reduced_boson_density(gs: &GroundState) -> DMatrix<f64> {
    let levels = gs.basis.boson_levels();
    let m = DMatrix::from_row_slice(gs.basis.spin.dim(), levels, &gs.vector);
    m.transpose() * m
}

/// `−Σ μ ln μ` over the eigenvalues of a density matrix, eigenvalues
/// clipped to `[0, 1]` with `0 ln 0 = 0`.
pub fn von_neumann_entropy(rho: DMatrix<f64>) -> f64 {
    let eig = nalgebra::SymmetricEigen::new(rho);
    eig.eigenvalues
        .iter()
        .map(|&mu| mu.clamp(0.0, 1.0))
        .filter(|&mu| mu > CLIP)
        .map(|mu| -mu * mu.ln())
        .sum()
}

/// Spin-oscillator entanglement entropy in nats.
pub fn entanglement_entropy(gs: &GroundState) -> f64 {
    von_neumann_entropy(reduced_spin_density(gs))
}

/// `Tr ρ²`.
pub fn purity(rho: &DMatrix<f64>) -> f64 {
    rho.iter().map(|x| x * x).sum()
}

/// Checks that a state vector matches the basis dimension.
pub fn check_state(basis: &BasisSpec, v: &[f64]) -> Result<()> {
    if v.len() != basis.dim() {
        return Err(Error::DimensionMismatch {
            expected: basis.dim(),
            found: v.len(),
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use crate::dicke::{build_hamiltonian, jz_operator, parity_diagonal};
    use crate::hilbert::SpinLength;

    fn product_state(spin: SpinLength, cutoff: usize) -> GroundState {
        let basis = BasisSpec::new(spin, cutoff).unwrap();
        let mut vector = vec![0.0; basis.dim()];
        vector[0] = 1.0;
        GroundState {
            energy: 0.0,
            vector,
            params: ModelParams::with_kappa(spin, 1.0, 1.0, 0.0).unwrap(),
            basis,
            iterations: 0,
            tail_weight: 0.0,
            residual: 0.0,
            converged: true,
        }
    }

    fn tight() -> SolverConfig {
        SolverConfig {
            lanczos: LanczosConfig { tol: 1e-14, ..Default::default() },
            ..Default::default()
        }
    }

    fn solve(two_j: u32, omega: f64, kappa: f64, epsilon: f64) -> GroundState {
        let spin = SpinLength::new(two_j).unwrap();
        let p = ModelParams::with_kappa(spin, 1.0, omega, kappa).unwrap().with_epsilon(epsilon);
        converge_cutoff(&p, suggested_start_cutoff(&p), &tight()).unwrap()
    }

    #[test]
    fn expectation_examples() {
        let gs = product_state(SpinLength::new(6).unwrap(), 3);
        let id = SparseOperator::identity(gs.basis.dim());
        assert_eq!(expectation(&id, &gs.vector).unwrap(), 1.0);
        assert_eq!(expectation(&jz_operator(&gs.basis), &gs.vector).unwrap(), -3.0);
        assert!(expectation(&id, &[1.0]).is_err());
    }

    #[test]
    fn product_state_diagnostics() {
        let gs = product_state(SpinLength::new(2).unwrap(), 4);
        let cov = spin_covariance(&gs);
        assert!((cov[0][0] - 0.5).abs() < 1e-15);
        assert_eq!(cov[0][1], 0.0);
        assert_eq!(cov[1][1], 0.0);
        assert_eq!(spin_variance(&gs), 0.0);
        assert_eq!(oscillator_variance(&gs), 1.0);
        let rho = reduced_spin_density(&gs);
        assert!((purity(&rho) - 1.0).abs() < 1e-15);
        assert_eq!(entanglement_entropy(&gs), 0.0);
    }

    #[test]
    fn spin_coherent_state_has_zero_spin_variance() {
        // Rotated |j, −j⟩ via dense exp(iθJy) = exp(θ·(J+ − J−)/2).
        let spin = SpinLength::new(7).unwrap();
        let m = spin_matrices(spin);
        let gen = (&m.jplus - &m.jminus).scaled(0.5 * 0.83);
        let rot = gen.to_dense().exp();
        let v: Vec<f64> = rot.column(0).iter().copied().collect();
        assert!(spin_variance_of(spin, &v) < 1e-10);
    }

    #[test]
    fn unbiased_states_have_positive_parity_and_no_order() {
        for (two_j, omega, kappa) in [(1, 1.0, 0.5), (4, 1.0, 1.5), (10, 0.2, 2.0), (6, 3.0, 0.8)] {
            let gs = solve(two_j, omega, kappa, 0.0);
            let (jx, _) = order_parameter(&gs);
            assert!(jx.abs() < 1e-9, "{two_j} {kappa}: jx {jx}");
            assert!((parity_expectation(&gs.basis, &gs.vector) - 1.0).abs() < 1e-8);
            let cov = spin_covariance(&gs);
            assert!(cov[0][1].abs() < 1e-9);
        }
    }

    #[test]
    fn decoupled_susceptibility_is_one() {
        for two_j in [1, 4, 9] {
            let p = ModelParams::with_kappa(SpinLength::new(two_j).unwrap(), 1.0, 1.0, 0.0).unwrap();
            let (chi, ok) = susceptibility(&p, &tight(), &SusceptibilityConfig::default()).unwrap();
            assert!(ok);
            assert!((chi - 1.0).abs() < 1e-6, "2j = {two_j}: chi {chi}");
        }
    }

    #[test]
    fn hellmann_feynman() {
        // ∂E/∂ε = −⟨Jx⟩ by central differences.
        let cfg = LanczosConfig { tol: 1e-15, residual_tol: Some(1e-11), ..Default::default() };
        for (two_j, omega, kappa, eps) in [(4, 1.0, 0.6, 0.05), (6, 0.5, 1.4, 0.02), (3, 2.0, 2.2, 0.1)] {
            let spin = SpinLength::new(two_j).unwrap();
            let p = ModelParams::with_kappa(spin, 1.0, omega, kappa).unwrap().with_epsilon(eps);
            let basis = BasisSpec::new(spin, 60).unwrap();
            let step = 1e-6;
            let e = |x: f64| solve_ground(&p.with_epsilon(x), &basis, &cfg, None).unwrap().energy;
            let de = (e(eps + step) - e(eps - step)) / (2.0 * step);
            let gs = solve_ground(&p, &basis, &cfg, None).unwrap();
            let (jx, _) = order_parameter(&gs);
            assert!((de + jx).abs() <= 1e-4 * jx.abs(), "{de} vs {jx}");
        }
    }

    #[test]
    fn schmidt_symmetry_and_bounds() {
        for (two_j, omega, kappa, eps) in [(1, 1.0, 1.2, 0.0), (4, 1.0, 0.9, 1e-4), (8, 0.5, 1.5, 0.0)] {
            let gs = solve(two_j, omega, kappa, eps);
            let s_spin = entanglement_entropy(&gs);
            let s_bos = von_neumann_entropy(reduced_boson_density(&gs));
            assert!((s_spin - s_bos).abs() < 1e-8, "{s_spin} vs {s_bos}");
            assert!(s_spin <= ((two_j + 1) as f64).ln() + 1e-9);
            let rho = reduced_spin_density(&gs);
            assert!((rho.trace() - 1.0).abs() < 1e-12);
            assert!(purity(&rho) <= 1.0 + 1e-12);
            assert!(smaller_eigenvalue(spin_covariance(&gs)) >= -1e-9);
        }
    }

    #[test]
    fn decoupled_spin_half_density() {
        let spin = SpinLength::HALF;
        let p = ModelParams::with_kappa(spin, 1.0, 1.0, 0.0).unwrap().with_epsilon(0.0);
        let gs = converge_cutoff(&p, 8, &tight()).unwrap();
        let rho = reduced_spin_density(&gs);
        assert!((rho[(0, 0)] - 1.0).abs() < 1e-12 && rho[(1, 1)].abs() < 1e-12);
        assert!(entanglement_entropy(&gs).abs() < 1e-9);
    }

    #[test]
    fn parity_on_states_is_consistent() {
        let gs = solve(3, 1.0, 1.3, 0.0);
        let pi = SparseOperator::diagonal(&parity_diagonal(&gs.basis));
        assert!((expectation(&pi, &gs.vector).unwrap() - 1.0).abs() < 1e-8);
        // Lanczos residual sanity on the same state.
        let h = build_hamiltonian(&gs.params, &gs.basis).unwrap();
        let hv = h.apply(&gs.vector);
        let r: f64 = hv.iter().zip(&gs.vector).map(|(a, b)| (a - gs.energy * b).powi(2)).sum::<f64>().sqrt();
        assert!(r < 1e-5);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]

        #[test]
        fn measured_state_invariants(
            two_j in 1u32..10,
            omega in 0.2f64..4.0,
            kappa in 0.0f64..2.5,
        ) {
            let gs = solve(two_j, omega, kappa, 0.0);
            prop_assert!(gs.converged);
            let j = f64::from(two_j) / 2.0;
            prop_assert!(order_parameter(&gs).0.abs() < 1e-9);
            let s = entanglement_entropy(&gs);
            prop_assert!(s >= 0.0 && s <= (2.0 * j + 1.0).ln() + 1e-9);
            let s_boson = von_neumann_entropy(reduced_boson_density(&gs));
            prop_assert!((s - s_boson).abs() < 1e-8);
            prop_assert!(oscillator_variance(&gs) >= 0.0);
            prop_assert!(spin_variance(&gs) >= -1e-9);
        }
    }
}
