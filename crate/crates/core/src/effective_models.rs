//! Effective Hamiltonians of the classical limits.
//!
//! * `BosBelow`, `BosAbove`: the oscillator left over when the spin is frozen
//!   (slow oscillator), a squeezed oscillator of frequency `Ω`, displaced by
//!   `α` above threshold.
//! * `Lmg`: the spin left over when the oscillator is eliminated (fast
//!   oscillator), `Δ(Jz − (κ/2j) Jx²)`.
//! * `HpBelow`, `HpAbove`: the large-`j` Holstein-Primakoff boson of the
//!   LMG model, a squeezed oscillator of frequency `Δ` or `Δκ`.
//!
//! Constant energy shifts are carried as a separate `offset`, so
//! [`EffectiveHamiltonian::total`] can be compared with full-model energies.

use crate::analytics::fo_spin_variance;
use crate::eigensolver::{dense_ground_with_limit, lanczos_ground, LanczosConfig};
use crate::error::{Error, Result};
use crate::hilbert::{boson_matrices, spin_matrices, BosonMatrices, SparseOperator, SpinLength};
use crate::observables::spin_variance_of;

/// LMG matrices are diagonalized densely up to `2j + 1 = 4001`.
pub const LMG_DENSE_LIMIT: usize = 4001;

/// Larger effective operators are solved by Lanczos.
pub const SPARSE_ABOVE: usize = 800;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ModelKind {
    BosBelow,
    BosAbove,
    Lmg,
    HpBelow,
    HpAbove,
}

impl ModelKind {
    pub fn name(self) -> &'static str {
        match self {
            ModelKind::BosBelow => "bos_below",
            ModelKind::BosAbove => "bos_above",
            ModelKind::Lmg => "lmg",
            ModelKind::HpBelow => "hp_below",
            ModelKind::HpAbove => "hp_above",
        }
    }
}

/// An effective operator together with its constant energy offset.
#[derive(Clone, Debug, PartialEq)]
pub struct EffectiveHamiltonian {
    pub kind: ModelKind,
    /// Fluctuation part, without the constant.
    pub operator: SparseOperator,
    pub offset: f64,
}

impl EffectiveHamiltonian {
    /// `operator + offset · 1`.
    pub fn total(&self) -> SparseOperator {
        &self.operator + &SparseOperator::identity(self.operator.dim()).scaled(self.offset)
    }

    /// Ground state, dense up to [`SPARSE_ABOVE`] states and Lanczos
    /// beyond; the energy includes the offset.
    pub fn ground(&self) -> Result<(f64, Vec<f64>)> {
        let (e, v) = if self.operator.dim() <= SPARSE_ABOVE {
            dense_ground_with_limit(&self.operator, LMG_DENSE_LIMIT)?
        } else {
            let cfg = LanczosConfig {
                tol: 1e-14,
                ..Default::default()
            };
            let out = lanczos_ground(&self.operator, &cfg);
            (out.energy, out.vector)
        };
        Ok((e + self.offset, v))
    }
}

/// Everything needed to build one effective model.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EffectiveModelSpec {
    pub kind: ModelKind,
    pub kappa: f64,
    pub spin: SpinLength,
    pub delta: f64,
    pub omega: f64,
    /// Ignored by `Lmg`.
    pub boson_cutoff: usize,
}

impl EffectiveModelSpec {
    pub fn build(&self) -> Result<EffectiveHamiltonian> {
        let j = self.spin.j();
        match self.kind {
            ModelKind::BosBelow => build_bos_below(self.kappa, self.omega, j, self.delta, self.boson_cutoff),
            ModelKind::BosAbove => {
                let alpha = above_threshold_alpha(self.kappa, j, self.delta, self.omega)?;
                build_bos_above(self.kappa, self.omega, j, self.delta, alpha, self.boson_cutoff)
            }
            ModelKind::Lmg => build_lmg(self.kappa, self.delta, self.spin),
            ModelKind::HpBelow => build_hp_bosonic(self.kappa, self.delta, self.boson_cutoff, Threshold::Below),
            ModelKind::HpAbove => build_hp_bosonic(self.kappa, self.delta, self.boson_cutoff, Threshold::Above),
        }
    }
}

/// Side of the transition an effective model describes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Threshold {
    Below,
    Above,
}

fn wrong_branch(model: &'static str, requirement: &'static str, kappa: f64) -> Error {
    Error::WrongBranch {
        model,
        requirement,
        kappa,
    }
}

/// `a†a + β q²` with `q = a + a†`.
fn squeezed(b: &BosonMatrices, beta: f64) -> SparseOperator {
    let q = b.q();
    &b.n + &(&q * &q).scaled(beta)
}

/// Positive-branch displacement `α = −jλ sin θ*/Ω` for `κ > 1`.
pub fn above_threshold_alpha(kappa: f64, j: f64, delta: f64, omega: f64) -> Result<f64> {
    let lambda = crate::analytics::lambda_from_kappa(j, delta, omega, kappa)?;
    let theta = crate::analytics::mf_theta(kappa, crate::analytics::Branch::Positive);
    crate::analytics::mf_alpha(theta, j, lambda, omega)
}

/// `−Δj + Ω(a†a − (κ/4)(a+a†)²)` on `N_b + 1` Fock states, `κ < 1`.
pub fn build_bos_below(kappa: f64, omega: f64, j: f64, delta: f64, cutoff: usize) -> Result<EffectiveHamiltonian> {
    if !(kappa < 1.0) {
        return Err(wrong_branch("bos_below", "kappa < 1", kappa));
    }
    let b = boson_matrices(cutoff)?;
    Ok(EffectiveHamiltonian {
        kind: ModelKind::BosBelow,
        operator: squeezed(&b, -kappa / 4.0).scaled(omega),
        offset: -delta * j,
    })
}

/// Smallest cutoff accepted for a displacement `α`.
pub fn displaced_cutoff(alpha: f64) -> usize {
    (alpha * alpha + 10.0 * alpha.abs().max(1.0)).ceil() as usize
}

/// `−(jΔ/2)(κ + 1/κ) + Ω[(a†−α)(a−α) − (1/(4κ²))(a+a†−2α)²]`, `κ > 1`.
///
/// The displacement is applied to the operators, so the Fock basis must
/// hold the shifted state: `N_b ≥ α² + 10·max(1, |α|)`.
pub fn build_bos_above(
    kappa: f64,
    omega: f64,
    j: f64,
    delta: f64,
    alpha: f64,
    cutoff: usize,
) -> Result<EffectiveHamiltonian> {
    if !(kappa > 1.0) {
        return Err(wrong_branch("bos_above", "kappa > 1", kappa));
    }
    if cutoff < displaced_cutoff(alpha) {
        return Err(Error::InvalidParameter(format!(
            "cutoff {cutoff} too small for displacement {alpha}; need at least {}",
            displaced_cutoff(alpha)
        )));
    }
    let b = boson_matrices(cutoff)?;
    let levels = cutoff + 1;
    let id = SparseOperator::identity(levels);
    let shift = id.scaled(alpha);
    let a = &b.a - &shift;
    let adag = &b.adag - &shift;
    let q = &b.q() - &id.scaled(2.0 * alpha);
    let op = &(&adag * &a) - &(&q * &q).scaled(1.0 / (4.0 * kappa * kappa));
    Ok(EffectiveHamiltonian {
        kind: ModelKind::BosAbove,
        operator: op.scaled(omega),
        offset: -0.5 * j * delta * (kappa + 1.0 / kappa),
    })
}

/// `Δ(Jz − (κ/2j) Jx²)` on the `2j + 1` spin states.
pub fn build_lmg(kappa: f64, delta: f64, spin: SpinLength) -> Result<EffectiveHamiltonian> {
    build_lmg_with_field(kappa, delta, spin, 0.0)
}

/// LMG model with the symmetry-breaking term `−ε Jx`, which selects the
/// `⟨Jx⟩ > 0` branch above threshold.
pub fn build_lmg_with_field(kappa: f64, delta: f64, spin: SpinLength, epsilon: f64) -> Result<EffectiveHamiltonian> {
    if !(kappa >= 0.0) || !kappa.is_finite() || !(delta > 0.0) {
        return Err(Error::InvalidParameter(format!("need kappa >= 0 and delta > 0, got {kappa}, {delta}")));
    }
    let s = spin_matrices(spin);
    let jx2 = &s.jx * &s.jx;
    let op = &(&s.jz - &jx2.scaled(kappa / (2.0 * spin.j()))).scaled(delta) - &s.jx.scaled(epsilon);
    Ok(EffectiveHamiltonian {
        kind: ModelKind::Lmg,
        operator: op,
        offset: 0.0,
    })
}

/// Rotation-invariant spin variance of the LMG ground state at field `ε`.
pub fn lmg_spin_variance(kappa: f64, delta: f64, spin: SpinLength, epsilon: f64) -> Result<f64> {
    let (_, v) = build_lmg_with_field(kappa, delta, spin, epsilon)?.ground()?;
    Ok(spin_variance_of(spin, &v))
}

/// Holstein-Primakoff boson of the LMG model.
///
/// Below: `Δ(b†b − (κ/4)(b+b†)²)`, offset `−jΔ`. Above:
/// `Δκ(b†b − (1/(4κ²))(b+b†)²)`, offset `−(jΔ/2)(κ + 1/κ)`. The spin length
/// only enters the offset, so it is reported relative to `j = 1`; multiply
/// by `j` for a given spin.
pub fn build_hp_bosonic(kappa: f64, delta: f64, cutoff: usize, side: Threshold) -> Result<EffectiveHamiltonian> {
    let b = boson_matrices(cutoff)?;
    match side {
        Threshold::Below => {
            if !(kappa < 1.0) {
                return Err(wrong_branch("hp_below", "kappa < 1", kappa));
            }
            Ok(EffectiveHamiltonian {
                kind: ModelKind::HpBelow,
                operator: squeezed(&b, -kappa / 4.0).scaled(delta),
                offset: -delta,
            })
        }
        Threshold::Above => {
            if !(kappa > 1.0) {
                return Err(wrong_branch("hp_above", "kappa > 1", kappa));
            }
            Ok(EffectiveHamiltonian {
                kind: ModelKind::HpAbove,
                operator: squeezed(&b, -1.0 / (4.0 * kappa * kappa)).scaled(delta * kappa),
                offset: -0.5 * delta * (kappa + 1.0 / kappa),
            })
        }
    }
}

/// `⟨q⟩` and `Δq` of a Fock-space state.
pub fn fock_q_moments(cutoff: usize, v: &[f64]) -> Result<(f64, f64)> {
    let b = boson_matrices(cutoff)?;
    let qv = b.q().apply(v);
    let mean: f64 = v.iter().zip(&qv).map(|(a, b)| a * b).sum();
    let second: f64 = qv.iter().map(|x| x * x).sum();
    Ok((mean, second - mean * mean))
}

/// Variance of `b†b` in a Fock-space state.
pub fn fock_n_variance(v: &[f64]) -> f64 {
    let (m1, m2) = v.iter().enumerate().fold((0.0, 0.0), |(m1, m2), (n, x)| {
        let p = x * x;
        (m1 + n as f64 * p, m2 + (n * n) as f64 * p)
    });
    m2 - m1 * m1
}

/// Oscillator variance `Δq` of the slow-oscillator effective model on the
/// appropriate side of the transition.
pub fn effective_delta_q(kappa: f64, j: f64, delta: f64, omega: f64) -> Result<f64> {
    if kappa < 1.0 {
        let h = build_bos_below(kappa, omega, j, delta, 160)?;
        let (_, v) = h.ground()?;
        Ok(fock_q_moments(160, &v)?.1)
    } else if kappa > 1.0 {
        let alpha = above_threshold_alpha(kappa, j, delta, omega)?;
        let cutoff = displaced_cutoff(alpha).max(160);
        let h = build_bos_above(kappa, omega, j, delta, alpha, cutoff)?;
        let (_, v) = h.ground()?;
        Ok(fock_q_moments(cutoff, &v)?.1)
    } else {
        Err(Error::InvalidParameter("effective models exclude kappa = 1".into()))
    }
}

/// Large-`j` spin variance of the LMG model, the number variance of the
/// Holstein-Primakoff boson.
pub fn hp_spin_variance(kappa: f64) -> f64 {
    fo_spin_variance(kappa)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use crate::analytics::co_oscillator_variance;
    use crate::dicke::ModelParams;
    use crate::eigensolver::{converge_cutoff, suggested_start_cutoff, SolverConfig};
    use crate::eigensolver::GroundState;
    use crate::observables::{oscillator_variance, spin_variance};

    fn spin(two_j: u32) -> SpinLength {
        SpinLength::new(two_j).unwrap()
    }

    #[test]
    fn decoupled_oscillator() {
        let h = build_bos_below(0.0, 0.3, 2.0, 1.0, 30).unwrap();
        assert_eq!(h.total().diagonal_values()[..3], [-2.0, -1.7, -1.4]);
        let (e, _) = h.ground().unwrap();
        assert!((e + 2.0).abs() < 1e-14);
    }

    #[test]
    fn below_threshold_oscillator() {
        let h = build_bos_below(0.75, 1.0, 1.0, 1.0, 160).unwrap();
        let (_, v) = h.ground().unwrap();
        assert!((fock_q_moments(160, &v).unwrap().1 - 2.0).abs() < 1e-8);

        let (omega, j) = (0.7, 3.0);
        let h = build_bos_below(0.5, omega, j, 1.0, 120).unwrap();
        let (e, _) = h.ground().unwrap();
        assert!((e - (-j + 0.5 * omega * (0.5f64.sqrt() - 1.0))).abs() < 1e-8);
        assert!(matches!(build_bos_below(1.0, 1.0, 1.0, 1.0, 10), Err(Error::WrongBranch { .. })));
    }

    #[test]
    fn above_threshold_oscillator() {
        let (j, omega) = (5.0, 0.05);
        let alpha = above_threshold_alpha(2.0, j, 1.0, omega).unwrap();
        let cutoff = displaced_cutoff(alpha) + 100;
        let h = build_bos_above(2.0, omega, j, 1.0, alpha, cutoff).unwrap();
        let (_, v) = h.ground().unwrap();
        let (mean, var) = fock_q_moments(cutoff, &v).unwrap();
        assert!((var - 0.75f64.powf(-0.5)).abs() < 1e-6, "{var}");
        assert!((mean - 2.0 * alpha).abs() < 1e-6, "{mean} vs {}", 2.0 * alpha);
        assert!(matches!(build_bos_above(1.0, 1.0, 1.0, 1.0, 0.0, 20), Err(Error::WrongBranch { .. })));
        assert!(build_bos_above(2.0, omega, j, 1.0, alpha, cutoff / 4).is_err());
    }

    #[test]
    fn branches_meet_at_threshold() {
        let (j, omega, cutoff) = (5.0, 1.0, 20);
        let below = build_bos_below(1.0 - 1e-6, omega, j, 1.0, cutoff).unwrap();
        let alpha = above_threshold_alpha(1.0 + 1e-6, j, 1.0, omega).unwrap();
        let above = build_bos_above(1.0 + 1e-6, omega, j, 1.0, alpha, cutoff).unwrap();
        assert!(below.total().max_abs_diff(&above.total()) < 1e-4 * omega);
    }

    #[test]
    fn lmg_examples() {
        let h = build_lmg(0.0, 1.0, spin(8)).unwrap();
        let (e, v) = h.ground().unwrap();
        assert!((e + 4.0).abs() < 1e-14);
        assert!((v[0].abs() - 1.0).abs() < 1e-14);
        assert!(h.operator.is_symmetric());

        let dj = lmg_spin_variance(0.5, 1.0, spin(100), 0.0).unwrap();
        assert!((dj - 0.0625).abs() < 0.01, "{dj}");
    }

    #[test]
    fn hp_examples() {
        let below = build_hp_bosonic(0.5, 1.0, 120, Threshold::Below).unwrap();
        let (_, v) = below.ground().unwrap();
        assert!((fock_n_variance(&v) - 1.0 / 16.0).abs() < 1e-8);

        let above = build_hp_bosonic(2.0, 1.0, 120, Threshold::Above).unwrap();
        let (_, v) = above.ground().unwrap();
        assert!((fock_n_variance(&v) - 1.0 / 96.0).abs() < 1e-8);
        assert!((hp_spin_variance(2.0) - 1.0 / 96.0).abs() < 1e-15);

        let gap_h = build_hp_bosonic(0.75, 1.0, 160, Threshold::Below).unwrap();
        let (values, _) = crate::eigensolver::dense_eigen(gap_h.operator.to_dense());
        assert!((values[1] - values[0] - 0.5).abs() < 1e-8);

        assert!(build_hp_bosonic(1.5, 1.0, 10, Threshold::Below).is_err());
        assert!(build_hp_bosonic(0.5, 1.0, 10, Threshold::Above).is_err());
    }

    #[test]
    fn slow_and_fast_oscillators_are_dual() {
        // Same operator up to the frequency, Ω for the oscillator model and
        // Δ for the Holstein-Primakoff boson.
        let (omega, delta, kappa) = (0.37, 1.9, 0.6);
        let bos = build_bos_below(kappa, omega, 4.0, delta, 25).unwrap();
        let hp = build_hp_bosonic(kappa, delta, 25, Threshold::Below).unwrap();
        let rescaled = bos.operator.scaled(delta / omega);
        assert!(rescaled.max_abs_diff(&hp.operator) < 1e-13);
    }

    #[test]
    fn every_kind_builds() {
        let s = |kind, kappa| EffectiveModelSpec {
            kind,
            kappa,
            spin: spin(4),
            delta: 1.0,
            omega: 0.5,
            boson_cutoff: 60,
        };
        for (kind, kappa) in [
            (ModelKind::BosBelow, 0.5),
            (ModelKind::BosAbove, 1.5),
            (ModelKind::Lmg, 1.5),
            (ModelKind::HpBelow, 0.5),
            (ModelKind::HpAbove, 1.5),
        ] {
            let h = s(kind, kappa).build().unwrap();
            assert_eq!(h.kind, kind);
            assert!(h.operator.is_symmetric(), "{}", kind.name());
        }
    }

    fn full(two_j: u32, omega: f64, kappa: f64) -> GroundState {
        let p = ModelParams::with_kappa(spin(two_j), 1.0, omega, kappa).unwrap();
        converge_cutoff(&p, suggested_start_cutoff(&p), &SolverConfig::default()).unwrap()
    }

    #[test]
    fn slow_oscillator_matches_full_model() {
        for kappa in [0.25, 0.5, 0.75, 1.5, 2.0, 3.0] {
            let gs = full(10, 0.002, kappa);
            let eff = effective_delta_q(kappa, 5.0, 1.0, 0.002).unwrap();
            let dq = oscillator_variance(&gs);
            assert!((dq - eff).abs() <= 0.03, "kappa {kappa}: full {dq}, effective {eff}");
            assert!((eff - co_oscillator_variance(kappa)).abs() < 1e-6);
        }
    }

    #[test]
    fn lmg_approaches_large_spin_limit() {
        for kappa in [0.5, 2.0] {
            let dj = lmg_spin_variance(kappa, 1.0, spin(400), 1e-4).unwrap();
            let exact = fo_spin_variance(kappa);
            assert!((dj - exact).abs() <= 0.05 * exact, "kappa {kappa}: {dj} vs {exact}");
        }
    }

    #[test]
    fn full_model_approaches_lmg_as_oscillator_speeds_up() {
        // The residual difference shrinks like Δ/Ω.
        let spin_len = spin(20);
        for kappa in [0.5, 1.5] {
            let lmg = lmg_spin_variance(kappa, 1.0, spin_len, 1e-4).unwrap();
            let gap = |omega: f64| (spin_variance(&full(20, omega, kappa)) - lmg).abs();
            let (slow, fast) = (gap(20.0), gap(200.0));
            assert!(fast < 0.2 * slow, "kappa {kappa}: {slow} -> {fast}");
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn duality_holds_for_any_frequencies(
            kappa in 0.01f64..0.99,
            omega in 0.05f64..20.0,
            delta in 0.05f64..20.0,
            cutoff in 2usize..40,
        ) {
            let bos = build_bos_below(kappa, omega, 3.0, delta, cutoff).unwrap();
            let hp = build_hp_bosonic(kappa, delta, cutoff, Threshold::Below).unwrap();
            let scale = 1.0 + hp.operator.norm_bound();
            prop_assert!(bos.operator.scaled(delta / omega).max_abs_diff(&hp.operator) < 1e-13 * scale);
        }
    }
}
