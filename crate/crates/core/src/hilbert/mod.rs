//! Spin and boson operators on a truncated spin ⊗ Fock space.
//!
//! The composite basis is spin-major: the flat index of `|m⟩ ⊗ |n⟩` is
//! `s·(N_b+1) + n` with `s = m + j`, so `s = 0` is `m = −j`. Growing the
//! boson cutoff appends levels to the end of every spin block, which is what
//! lets the cutoff ladder reuse converged vectors by zero-padding.

mod sparse;

pub use sparse::{kron, SparseOperator};

use crate::error::{Error, Result};

/// Spin length stored as `2j`, so half-integer spins stay exact.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SpinLength(u32);

impl SpinLength {
    pub fn new(two_j: u32) -> Result<Self> {
        if two_j == 0 {
            return Err(Error::InvalidSpin(two_j));
        }
        Ok(SpinLength(two_j))
    }

    /// Spin one-half, the Rabi case.
    pub const HALF: SpinLength = SpinLength(1);

    pub fn two_j(self) -> u32 {
        self.0
    }

    pub fn j(self) -> f64 {
        f64::from(self.0) / 2.0
    }

    /// Number of `Jz` eigenstates, `2j + 1`.
    pub fn dim(self) -> usize {
        self.0 as usize + 1
    }

    /// `Jz` eigenvalue of spin index `s`.
    pub fn m(self, s: usize) -> f64 {
        s as f64 - self.j()
    }
}

/// Truncated composite Hilbert space: full spin multiplet times Fock states
/// `|0⟩ … |N_b⟩`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct BasisSpec {
    pub spin: SpinLength,
    pub boson_cutoff: usize,
}

impl BasisSpec {
    pub fn new(spin: SpinLength, boson_cutoff: usize) -> Result<Self> {
        if boson_cutoff == 0 {
            return Err(Error::InvalidCutoff(boson_cutoff));
        }
        Ok(BasisSpec { spin, boson_cutoff })
    }

    /// Number of retained Fock levels, `N_b + 1`.
    pub fn boson_levels(&self) -> usize {
        self.boson_cutoff + 1
    }

    pub fn dim(&self) -> usize {
        self.spin.dim() * self.boson_levels()
    }

    pub fn index(&self, spin_index: usize, boson_index: usize) -> usize {
        debug_assert!(spin_index < self.spin.dim() && boson_index < self.boson_levels());
        spin_index * self.boson_levels() + boson_index
    }

    /// Embeds a vector of this basis into a basis with a larger cutoff by
    /// zero-padding each spin block.
    pub fn embed(&self, v: &[f64], target: &BasisSpec) -> Vec<f64> {
        assert_eq!(self.spin, target.spin);
        assert!(target.boson_cutoff >= self.boson_cutoff);
        assert_eq!(v.len(), self.dim());
        let mut out = vec![0.0; target.dim()];
        for (s, block) in v.chunks(self.boson_levels()).enumerate() {
            let start = target.index(s, 0);
            out[start..start + block.len()].copy_from_slice(block);
        }
        out
    }
}

/// Spin operators of one multiplet, all real.
#[derive(Clone, Debug)]
pub struct SpinMatrices {
    pub jz: SparseOperator,
    pub jplus: SparseOperator,
    pub jminus: SparseOperator,
    pub jx: SparseOperator,
}

/// Spin operators in the `Jz` eigenbasis ordered `m = −j … j`.
pub fn spin_matrices(spin: SpinLength) -> SpinMatrices {
    let two_j = i64::from(spin.two_j());
    let dim = spin.dim();
    let jz = SparseOperator::diagonal(&(0..dim).map(|s| spin.m(s)).collect::<Vec<_>>());
    // ⟨m+1|J+|m⟩ = √(j(j+1) − m(m+1)); with 2m = 2s − 2j the radicand is
    // (2j(2j+2) − 2m(2m+2)) / 4, an exact integer expression.
    let jplus = SparseOperator::from_triplets(
        dim,
        (0..dim - 1).map(|s| {
            let two_m = 2 * s as i64 - two_j;
            let radicand = (two_j * (two_j + 2) - two_m * (two_m + 2)) as f64 / 4.0;
            (s + 1, s, radicand.sqrt())
        }),
    );
    let jminus = jplus.transpose();
    let jx = (&jplus + &jminus).scaled(0.5);
    SpinMatrices {
        jz,
        jplus,
        jminus,
        jx,
    }
}

/// Boson ladder operators truncated to `|0⟩ … |N_b⟩`.
#[derive(Clone, Debug)]
pub struct BosonMatrices {
    pub a: SparseOperator,
    pub adag: SparseOperator,
    pub n: SparseOperator,
}

impl BosonMatrices {
    /// Position-like quadrature `a + a†`.
    pub fn q(&self) -> SparseOperator {
        &self.a + &self.adag
    }
}

pub fn boson_matrices(cutoff: usize) -> Result<BosonMatrices> {
    if cutoff == 0 {
        return Err(Error::InvalidCutoff(cutoff));
    }
    let dim = cutoff + 1;
    let adag =
        SparseOperator::from_triplets(dim, (0..cutoff).map(|n| (n + 1, n, ((n + 1) as f64).sqrt())));
    let a = adag.transpose();
    let n = SparseOperator::diagonal(&(0..dim).map(|n| n as f64).collect::<Vec<_>>());
    Ok(BosonMatrices { a, adag, n })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn spin(two_j: u32) -> SpinLength {
        SpinLength::new(two_j).unwrap()
    }

    #[test]
    fn zero_spin_is_rejected() {
        assert!(matches!(SpinLength::new(0), Err(Error::InvalidSpin(0))));
        assert!(matches!(boson_matrices(0), Err(Error::InvalidCutoff(0))));
    }

    #[test]
    fn spin_half_is_pauli_over_two() {
        let s = spin_matrices(SpinLength::HALF);
        assert_eq!(s.jx.to_dense(), nalgebra::dmatrix![0.0, 0.5; 0.5, 0.0]);
        assert_eq!(s.jz.to_dense(), nalgebra::dmatrix![-0.5, 0.0; 0.0, 0.5]);
    }

    #[test]
    fn spin_one_ladder() {
        let s = spin_matrices(spin(2));
        let r = std::f64::consts::FRAC_1_SQRT_2;
        for (row, col) in [(0, 1), (1, 0), (1, 2), (2, 1)] {
            assert!((s.jx.get(row, col) - r).abs() < 1e-15);
        }
        assert_eq!(s.jz.diagonal_values(), vec![-1.0, 0.0, 1.0]);
    }

    #[test]
    fn boson_examples() {
        let b = boson_matrices(1).unwrap();
        assert_eq!(b.a.to_dense(), nalgebra::dmatrix![0.0, 1.0; 0.0, 0.0]);
        let b3 = boson_matrices(3).unwrap();
        assert_eq!(b3.n.diagonal_values(), vec![0.0, 1.0, 2.0, 3.0]);
        // √n·√n rounds, so the product matches only to an ulp or two.
        assert!((&b3.adag * &b3.a).max_abs_diff(&b3.n) < 1e-14);
        let q = boson_matrices(2).unwrap().q();
        assert_eq!(q.get(0, 1), 1.0);
        assert_eq!(q.get(1, 2), 2f64.sqrt());
        assert!(q.is_symmetric());
    }

    #[test]
    fn truncated_commutator_signature() {
        for cutoff in [1, 4, 17] {
            let b = boson_matrices(cutoff).unwrap();
            let comm = &(&b.a * &b.adag) - &(&b.adag * &b.a);
            let mut diag = vec![1.0; cutoff + 1];
            diag[cutoff] = -(cutoff as f64);
            let expected = SparseOperator::diagonal(&diag);
            assert_eq!(comm.entries().map(|(r, c, _)| (r, c)).collect::<Vec<_>>(), expected.entries().map(|(r, c, _)| (r, c)).collect::<Vec<_>>());
            assert!(comm.max_abs_diff(&expected) < 1e-14 * (1.0 + cutoff as f64));
        }
    }

    #[test]
    fn composite_indexing_and_embedding() {
        let basis = BasisSpec::new(SpinLength::HALF, 1).unwrap();
        assert_eq!(basis.dim(), 4);
        assert_eq!(basis.index(1, 0), 2);
        let bigger = BasisSpec::new(SpinLength::HALF, 2).unwrap();
        assert_eq!(basis.embed(&[1.0, 2.0, 3.0, 4.0], &bigger), vec![1.0, 2.0, 0.0, 3.0, 4.0, 0.0]);
    }

    #[test]
    fn kron_acts_on_product_vectors() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let mut random_op = |n: usize| {
            SparseOperator::from_triplets(
                n,
                (0..n).flat_map(|r| (0..n).map(move |c| (r, c))).map(|(r, c)| (r, c, rng.random_range(-1.0..1.0))).collect::<Vec<_>>(),
            )
        };
        let a = random_op(3);
        let b = random_op(3);
        let u = [0.3, -1.2, 0.7];
        let v = [1.1, 0.4, -0.5];
        let uv: Vec<f64> = u.iter().flat_map(|x| v.iter().map(move |y| x * y)).collect();
        let lhs = kron(&a, &b).apply(&uv);
        let (au, bv) = (a.apply(&u), b.apply(&v));
        let rhs: Vec<f64> = au.iter().flat_map(|x| bv.iter().map(move |y| x * y)).collect();
        for (l, r) in lhs.iter().zip(&rhs) {
            assert!((l - r).abs() < 1e-12);
        }
    }

    #[test]
    fn small_spin_commutator_is_exact_to_1e_12() {
        for two_j in 1..=20 {
            let s = spin_matrices(spin(two_j));
            let ijy = (&s.jplus - &s.jminus).scaled(0.5);
            let comm = &(&s.jx * &ijy) - &(&ijy * &s.jx);
            assert!((&comm + &s.jz).max_abs_diff(&SparseOperator::zeros(s.jz.dim())) < 1e-12);
        }
    }

    proptest! {
        #[test]
        fn angular_momentum_algebra(two_j in 1u32..=200) {
            let s = spin_matrices(spin(two_j));
            prop_assert!(s.jx.is_symmetric() && s.jz.is_symmetric());
            // iJy = (J+ − J−)/2 is real; [Jx, Jy] = iJz becomes [Jx, iJy] = −Jz.
            let ijy = (&s.jplus - &s.jminus).scaled(0.5);
            let comm = &(&s.jx * &ijy) - &(&ijy * &s.jx);
            // Products of ladder coefficients carry rounding of order ulp(j²),
            // so the tolerance is relative to the operator scale.
            let j = spin(two_j).j();
            let scale = 1.0f64.max(j * (j + 1.0));
            prop_assert!((&comm + &s.jz).max_abs_diff(&SparseOperator::zeros(s.jz.dim())) < 1e-12 * scale);
            // J² = Jx² + Jy² + Jz² with Jy² = −(iJy)².
            let j2 = &(&(&s.jx * &s.jx) - &(&ijy * &ijy)) + &(&s.jz * &s.jz);
            let target = SparseOperator::identity(s.jz.dim()).scaled(j * (j + 1.0));
            prop_assert!(j2.max_abs_diff(&target) < 1e-12 * scale);
        }
    }
}
