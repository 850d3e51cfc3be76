//! Ground states of sparse symmetric operators.
//!
//! [`lanczos_ground`] is a Lanczos iteration with full reorthogonalization
//! of the Krylov basis. When the basis reaches `krylov_dim` vectors it is
//! thick-restarted: the lowest `keep` Ritz vectors and the current residual
//! direction are retained, so memory stays bounded on large truncations
//! while convergence toward the lowest eigenvalue is not lost.
//!
//! [`dense_ground`] is the full-diagonalization oracle used to validate it.
//! [`converge_cutoff`] grows the boson cutoff until the truncation is
//! demonstrably irrelevant.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::dicke::{build_hamiltonian, parity_diagonal, ModelParams};
use crate::error::{Error, Result};
use crate::hilbert::{BasisSpec, SparseOperator};

/// Default size limit for [`dense_ground`].
pub const DEFAULT_DENSE_LIMIT: usize = 4000;

/// Largest boson cutoff the ladder will try.
pub const MAX_CUTOFF: usize = 16384;

const PAR_LEN: usize = 1 << 14;
const CHUNK: usize = 4096;

/// Dot product with a fixed chunked reduction order, so results do not
/// depend on the number of worker threads.
fn dot(a: &[f64], b: &[f64]) -> f64 {
    if a.len() < PAR_LEN {
        return a.iter().zip(b).map(|(x, y)| x * y).sum();
    }
    let partial: Vec<f64> = a
        .par_chunks(CHUNK)
        .zip(b.par_chunks(CHUNK))
        .map(|(x, y)| x.iter().zip(y).map(|(p, q)| p * q).sum::<f64>())
        .collect();
    partial.iter().sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn scale(a: &mut [f64], s: f64) {
    a.iter_mut().for_each(|x| *x *= s);
}

/// `w -= Σ c_i v_i`, elementwise in parallel.
fn subtract_combination(w: &mut [f64], basis: &[Vec<f64>], coeffs: &[f64]) {
    let update = |(k, x): (usize, &mut f64)| {
        let mut acc = 0.0;
        for (v, c) in basis.iter().zip(coeffs) {
            acc += c * v[k];
        }
        *x -= acc;
    };
    if w.len() >= PAR_LEN {
        w.par_iter_mut().enumerate().for_each(update);
    } else {
        w.iter_mut().enumerate().for_each(update);
    }
}

/// `Σ_i y_i v_i` over the first `y.len()` basis vectors.
fn combine(basis: &[Vec<f64>], y: &[f64]) -> Vec<f64> {
    let n = basis[0].len();
    let at = |k: usize| -> f64 { basis.iter().zip(y).map(|(v, c)| c * v[k]).sum() };
    if n >= PAR_LEN {
        (0..n).into_par_iter().map(at).collect()
    } else {
        (0..n).map(at).collect()
    }
}

pub fn random_unit_vector(dim: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v: Vec<f64> = (0..dim).map(|_| rng.random_range(-0.5..0.5)).collect();
    let n = norm(&v);
    scale(&mut v, 1.0 / n);
    v
}

/// Symmetric eigendecomposition with eigenvalues ascending and eigenvectors
/// as matching columns.
pub fn dense_eigen(m: DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let eig = SymmetricEigen::new(m);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(eig.eigenvectors.nrows(), order.len(), |r, c| {
        eig.eigenvectors[(r, order[c])]
    });
    (values, vectors)
}

/// Lowest eigenpair by full diagonalization, limited to
/// [`DEFAULT_DENSE_LIMIT`]. The vector's first significant component is
/// positive.
pub fn dense_ground(h: &SparseOperator) -> Result<(f64, Vec<f64>)> {
    dense_ground_with_limit(h, DEFAULT_DENSE_LIMIT)
}

pub fn dense_ground_with_limit(h: &SparseOperator, limit: usize) -> Result<(f64, Vec<f64>)> {
    if h.dim() > limit {
        return Err(Error::DenseTooLarge { dim: h.dim(), limit });
    }
    let (values, vectors) = dense_eigen(h.to_dense());
    let mut v: Vec<f64> = vectors.column(0).iter().copied().collect();
    fix_sign(&mut v);
    Ok((values[0], v))
}

fn fix_sign(v: &mut [f64]) {
    if let Some(&first) = v.iter().find(|x| x.abs() > 1e-12) {
        if first < 0.0 {
            scale(v, -1.0);
        }
    }
}

#[derive(Clone, Debug)]
pub struct LanczosConfig {
    /// Relative change of the lowest Ritz value between checks.
    pub tol: f64,
    /// Limit on matrix-vector products.
    pub max_iter: usize,
    pub seed: u64,
    /// Basis size that triggers a thick restart.
    pub krylov_dim: usize,
    /// Ritz vectors retained across a restart.
    pub keep: usize,
    /// Residual bound `‖Hv − Ev‖`; `None` means `√tol · ‖H‖_est`.
    pub residual_tol: Option<f64>,
}

impl Default for LanczosConfig {
    fn default() -> Self {
        LanczosConfig {
            tol: 1e-12,
            max_iter: 50_000,
            seed: 42,
            krylov_dim: 120,
            keep: 40,
            residual_tol: None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct LanczosOutcome {
    pub energy: f64,
    pub vector: Vec<f64>,
    /// Matrix-vector products performed.
    pub iterations: usize,
    /// `‖Hv − Ev‖` of the returned pair, computed explicitly.
    pub residual: f64,
    pub converged: bool,
    /// Lowest Ritz value at every convergence check, in order.
    pub ritz_history: Vec<f64>,
}

/// Lowest eigenpair from a seeded random start.
pub fn lanczos_ground(h: &SparseOperator, cfg: &LanczosConfig) -> LanczosOutcome {
    let start = random_unit_vector(h.dim(), cfg.seed);
    lanczos_ground_from(h, cfg, start)
}

/// Lowest eigenpair reachable from `start`. Components of `start` that are
/// exactly zero in a symmetry sector stay zero, which is how parity
/// sectors are selected.
pub fn lanczos_ground_from(h: &SparseOperator, cfg: &LanczosConfig, start: Vec<f64>) -> LanczosOutcome {
    let n = h.dim();
    assert_eq!(start.len(), n, "start vector has wrong length");
    assert!(cfg.tol > 0.0, "Lanczos tolerance must be positive");
    let m = cfg.krylov_dim.max(4).min(n);
    let keep = cfg.keep.clamp(1, m.saturating_sub(2).max(1));

    let mut v0 = start;
    let nv = norm(&v0);
    assert!(nv > 0.0, "start vector is zero");
    scale(&mut v0, 1.0 / nv);

    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(m + 1);
    basis.push(v0);
    // Projected operator, dense (m+1)×(m+1); only the active block is used.
    let mut t = DMatrix::<f64>::zeros(m + 1, m + 1);
    let mut w = vec![0.0; n];

    let mut iterations = 0;
    let mut h_norm_est: f64 = 0.0;
    let mut prev_theta: Option<f64> = None;
    let mut ritz_history = Vec::new();
    let mut j = 0;

    loop {
        h.apply_into(&basis[j], &mut w);
        iterations += 1;

        // Two classical Gram-Schmidt passes against the whole basis.
        let mut diag = 0.0;
        for _ in 0..2 {
            let coeffs: Vec<f64> = basis.par_iter().map(|v| dot(v, &w)).collect();
            diag += coeffs[j];
            subtract_combination(&mut w, &basis, &coeffs);
        }
        t[(j, j)] = diag;
        let beta = norm(&w);
        let size = j + 1;

        let exhausted = size == n || beta <= 1e-14 * h_norm_est.max(diag.abs()).max(f64::MIN_POSITIVE);
        let check = size < 40 || size % 5 == 0 || size == m || exhausted || iterations >= cfg.max_iter;
        if check {
            let (values, vectors) = dense_eigen(t.view((0, 0), (size, size)).into_owned());
            let theta = values[0];
            h_norm_est = h_norm_est.max(values[0].abs()).max(values[size - 1].abs());
            ritz_history.push(theta);
            let y: Vec<f64> = vectors.column(0).iter().copied().collect();
            let ritz_residual = beta * y[size - 1].abs();
            let rel_change = prev_theta.map_or(f64::INFINITY, |p| (theta - p).abs() / theta.abs().max(f64::MIN_POSITIVE));
            prev_theta = Some(theta);
            let residual_tol = cfg.residual_tol.unwrap_or(cfg.tol.sqrt() * h_norm_est);
            let converged = exhausted || (rel_change < cfg.tol && ritz_residual < residual_tol);

            if converged || iterations >= cfg.max_iter {
                let mut x = combine(&basis[..size], &y);
                let nx = norm(&x);
                scale(&mut x, 1.0 / nx);
                let hx = h.apply(&x);
                let energy = dot(&x, &hx);
                let r: Vec<f64> = hx.iter().zip(&x).map(|(a, b)| a - energy * b).collect();
                return LanczosOutcome {
                    energy,
                    residual: norm(&r),
                    vector: x,
                    iterations,
                    converged,
                    ritz_history,
                };
            }

            if size == m {
                // Thick restart: keep the lowest Ritz vectors and the
                // current residual direction.
                let y_keep: Vec<Vec<f64>> = (0..keep)
                    .map(|i| vectors.column(i).iter().copied().collect())
                    .collect();
                let mut kept: Vec<Vec<f64>> = y_keep.iter().map(|y| combine(&basis[..size], y)).collect();
                scale(&mut w, 1.0 / beta);
                kept.push(std::mem::replace(&mut w, vec![0.0; n]));
                basis = kept;
                t.fill(0.0);
                for i in 0..keep {
                    t[(i, i)] = values[i];
                    let s = beta * y_keep[i][size - 1];
                    t[(i, keep)] = s;
                    t[(keep, i)] = s;
                }
                j = keep;
                continue;
            }
        }

        t[(j, j + 1)] = beta;
        t[(j + 1, j)] = beta;
        let mut next = std::mem::replace(&mut w, vec![0.0; n]);
        scale(&mut next, 1.0 / beta);
        basis.push(next);
        j += 1;
    }
}

/// Settings for a full Dicke ground-state solve.
#[derive(Clone, Debug)]
pub struct SolverConfig {
    pub lanczos: LanczosConfig,
    /// Bound on the probability in the top 5% of Fock levels.
    pub tail_tol: f64,
    /// Relative energy change allowed between successive cutoffs.
    pub energy_tol: f64,
    pub max_cutoff: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            lanczos: LanczosConfig::default(),
            tail_tol: 1e-12,
            energy_tol: 1e-10,
            max_cutoff: MAX_CUTOFF,
        }
    }
}

/// A converged (or flagged) ground state of the Dicke model.
#[derive(Clone, Debug)]
pub struct GroundState {
    pub energy: f64,
    pub vector: Vec<f64>,
    pub params: ModelParams,
    pub basis: BasisSpec,
    pub iterations: usize,
    pub tail_weight: f64,
    pub residual: f64,
    /// Lanczos converged and, after [`converge_cutoff`], the cutoff too.
    pub converged: bool,
}

/// Probability carried by the top 5% of Fock levels (at least one level).
pub fn tail_weight(basis: &BasisSpec, v: &[f64]) -> f64 {
    let levels = basis.boson_levels();
    let top = ((levels as f64) * 0.05).ceil().max(1.0) as usize;
    v.chunks(levels)
        .map(|block| block[levels - top..].iter().map(|x| x * x).sum::<f64>())
        .sum()
}

/// Ground state on one fixed truncation. With `ε = 0` the start vector is
/// restricted to the even-parity sector, where the ground state lives.
pub fn solve_ground(
    p: &ModelParams,
    basis: &BasisSpec,
    cfg: &LanczosConfig,
    warm_start: Option<&[f64]>,
) -> Result<GroundState> {
    let h = build_hamiltonian(p, basis)?;
    let mut start = match warm_start {
        Some(v) if v.len() == basis.dim() => v.to_vec(),
        Some(v) => {
            return Err(Error::DimensionMismatch {
                expected: basis.dim(),
                found: v.len(),
            })
        }
        None => random_unit_vector(basis.dim(), cfg.seed),
    };
    if p.epsilon == 0.0 {
        for (x, parity) in start.iter_mut().zip(parity_diagonal(basis)) {
            if parity < 0.0 {
                *x = 0.0;
            }
        }
        if norm(&start) == 0.0 {
            start = random_unit_vector(basis.dim(), cfg.seed);
            for (x, parity) in start.iter_mut().zip(parity_diagonal(basis)) {
                if parity < 0.0 {
                    *x = 0.0;
                }
            }
        }
    }
    let out = lanczos_ground_from(&h, cfg, start);
    Ok(GroundState {
        energy: out.energy,
        tail_weight: tail_weight(basis, &out.vector),
        vector: out.vector,
        params: *p,
        basis: *basis,
        iterations: out.iterations,
        residual: out.residual,
        converged: out.converged,
    })
}

/// Smallest power-of-two cutoff that comfortably holds the mean-field
/// coherent state, `N_b ≥ α² + 12·max(1, |α|) + 16`, and at least 8.
pub fn suggested_start_cutoff(p: &ModelParams) -> usize {
    let alpha2 = crate::analytics::mf_alpha_squared(p.kappa, p.j(), p.omega_over_delta());
    let alpha = alpha2.sqrt();
    let need = alpha2 + 12.0 * alpha.max(1.0) + 16.0;
    (need.ceil() as usize).next_power_of_two().max(8)
}

/// Doubles the boson cutoff from `start_cutoff` until the tail weight is
/// below `cfg.tail_tol` and the energy agrees with the previous cutoff to
/// `cfg.energy_tol` relative. The first comparison is against
/// `start_cutoff / 2`. Returns the flagged last state when `cfg.max_cutoff`
/// is reached first.
pub fn converge_cutoff(p: &ModelParams, start_cutoff: usize, cfg: &SolverConfig) -> Result<GroundState> {
    if start_cutoff < 8 {
        return Err(Error::InvalidParameter(format!("start cutoff must be at least 8, got {start_cutoff}")));
    }
    if cfg.max_cutoff > MAX_CUTOFF || cfg.max_cutoff < start_cutoff {
        return Err(Error::InvalidParameter(format!(
            "max cutoff must lie in [{start_cutoff}, {MAX_CUTOFF}], got {}",
            cfg.max_cutoff
        )));
    }
    let mut prev = solve_ground(p, &BasisSpec::new(p.spin, start_cutoff / 2)?, &cfg.lanczos, None)?;
    let mut cutoff = start_cutoff;
    loop {
        let basis = BasisSpec::new(p.spin, cutoff)?;
        let warm = prev.basis.embed(&prev.vector, &basis);
        let mut cur = solve_ground(p, &basis, &cfg.lanczos, Some(&warm))?;
        let energy_ok = (cur.energy - prev.energy).abs() <= cfg.energy_tol * cur.energy.abs();
        if cur.converged && energy_ok && cur.tail_weight < cfg.tail_tol {
            return Ok(cur);
        }
        if cutoff * 2 > cfg.max_cutoff {
            cur.converged = false;
            return Ok(cur);
        }
        prev = cur;
        cutoff *= 2;
    }
}
