//! Symmetric eigendecomposition of the Hessian and the nullspace machinery.
//!
//! At a Hadamard the 25×25 curvature has (away from Tao's matrix) a
//! 4-dimensional nullspace of eigenvalues below [`DEFAULT_NULL_TOL`]. This
//! module extracts the full spectrum with a cyclic Jacobi sweep (fixed
//! iteration order and a fixed 1e-12 off-diagonal convergence tolerance, so
//! decompositions are reproducible), builds the nullspace projector, and
//! computes the Newton correction restricted to the curvature complement.

use crate::objective::{Gradient, Hessian};
use crate::{Error, Matrix25, Result, Vector25, DIM};

/// Eigenvalues at or below this threshold (in magnitude) count as nullspace.
pub const DEFAULT_NULL_TOL: f64 = 1e-4;

/// Off-diagonal Frobenius norm at which the Jacobi sweep stops.
const OFF_DIAGONAL_TOL: f64 = 1e-12;

/// Jacobi converges quadratically; 25×25 inputs need well under ten sweeps.
const MAX_SWEEPS: usize = 64;

/// Full spectrum of a symmetric 25×25 matrix, eigenvalues ascending by
/// absolute value so the nullspace occupies the leading `null_dim` slots.
#[derive(Debug, Clone)]
pub struct HessianSpectrum {
    eigenvalues: [f64; DIM],
    /// Row `k` is the unit eigenvector paired with `eigenvalues[k]`.
    eigenvectors: Matrix25,
    null_dim: usize,
    null_tol: f64,
}

impl HessianSpectrum {
    pub fn eigenvalues(&self) -> &[f64; DIM] {
        &self.eigenvalues
    }

    pub fn eigenvector(&self, k: usize) -> &Vector25 {
        &self.eigenvectors[k]
    }

    /// Count of eigenvalues with `|λ| ≤ null_tol`.
    pub fn null_dim(&self) -> usize {
        self.null_dim
    }

    pub fn null_tol(&self) -> f64 {
        self.null_tol
    }

    /// The eigenvectors spanning the nullspace.
    pub fn null_basis(&self) -> &[Vector25] {
        &self.eigenvectors[..self.null_dim]
    }

    pub fn fifth_smallest_abs(&self) -> f64 {
        self.eigenvalues[4].abs()
    }

    /// True when the spectrum separates cleanly at the threshold: the
    /// fifth-smallest |λ| is at least ten times `null_tol`. A 4-dimensional
    /// nullspace with an unclean gap must be treated as ambiguous.
    pub fn has_clean_gap(&self) -> bool {
        self.fifth_smallest_abs() >= 10.0 * self.null_tol
    }
}

/// Decompose a symmetric matrix (asymmetry beyond 1e-9 is rejected) and
/// classify its nullspace at the given threshold.
pub fn eig_sym(matrix: &Matrix25, null_tol: f64) -> Result<HessianSpectrum> {
    if !null_tol.is_finite() || null_tol <= 0.0 {
        return Err(Error::InvalidConfig(format!(
            "null_tol must be positive, got {null_tol}"
        )));
    }
    if matrix.iter().flatten().any(|e| !e.is_finite()) {
        return Err(Error::NonFiniteMatrix);
    }
    let mut asymmetry: f64 = 0.0;
    let mut sym = *matrix;
    for a in 0..DIM {
        for b in (a + 1)..DIM {
            asymmetry = asymmetry.max((matrix[a][b] - matrix[b][a]).abs());
            sym[b][a] = sym[a][b];
        }
    }
    if asymmetry > 1e-9 {
        return Err(Error::NotSymmetric { asymmetry });
    }

    let (values, vectors) = jacobi_eigen(sym)?;

    // Ascending by |λ|; stable, so the Jacobi output order breaks ties and
    // the decomposition stays deterministic for a fixed input.
    let mut order: Vec<usize> = (0..DIM).collect();
    order.sort_by(|&a, &b| values[a].abs().partial_cmp(&values[b].abs()).unwrap());

    let mut eigenvalues = [0.0; DIM];
    let mut eigenvectors = [[0.0; DIM]; DIM];
    for (slot, &src) in order.iter().enumerate() {
        eigenvalues[slot] = values[src];
        for (row, vec_row) in vectors.iter().enumerate() {
            eigenvectors[slot][row] = vec_row[src];
        }
    }
    let null_dim = eigenvalues
        .iter()
        .take_while(|l| l.abs() <= null_tol)
        .count();

    Ok(HessianSpectrum {
        eigenvalues,
        eigenvectors,
        null_dim,
        null_tol,
    })
}

/// [`eig_sym`] of an analytic Hessian (always exactly symmetric).
pub fn eig_hessian(h: &Hessian, null_tol: f64) -> Result<HessianSpectrum> {
    eig_sym(h.entries(), null_tol)
}

/// Orthogonal projector onto the nullspace, `P = Σ n̂_i n̂_iᵀ` over the
/// nullspace eigenvectors.
#[derive(Debug, Clone)]
pub struct NullspaceProjector {
    matrix: Matrix25,
    rank: usize,
}

impl NullspaceProjector {
    pub fn matrix(&self) -> &Matrix25 {
        &self.matrix
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn apply(&self, v: &Vector25) -> Vector25 {
        crate::linalg::matvec(&self.matrix, v)
    }

    /// `(I − P) v`, the component in the curvature complement.
    pub fn apply_complement(&self, v: &Vector25) -> Vector25 {
        crate::linalg::sub(v, &self.apply(v))
    }
}

pub fn nullspace_projector(spectrum: &HessianSpectrum) -> NullspaceProjector {
    let mut matrix = [[0.0; DIM]; DIM];
    for vec in spectrum.null_basis() {
        for (a, &va) in vec.iter().enumerate() {
            for (b, &vb) in vec.iter().enumerate() {
                matrix[a][b] += va * vb;
            }
        }
    }
    NullspaceProjector {
        matrix,
        rank: spectrum.null_dim(),
    }
}

/// A Newton step restricted to the curvature complement.
#[derive(Debug, Clone)]
pub struct NewtonCorrection {
    /// `Δ = −Σ_{|λ_i| > null_tol} n̂_i (n̂_i·g)/λ_i`
    pub delta: Vector25,
    /// Set when some eigenvalue falls strictly between `null_tol` and
    /// `10·null_tol`: the pseudo-inverse is then poorly separated from the
    /// nullspace and callers should halt rather than continue.
    pub gap_warning: bool,
}

/// Pseudo-inverse Newton correction using only eigenvalues outside the
/// nullspace; the result is orthogonal to the nullspace by construction.
pub fn newton_correction(g: &Gradient, spectrum: &HessianSpectrum) -> NewtonCorrection {
    let mut delta = [0.0; DIM];
    let mut gap_warning = false;
    let tol = spectrum.null_tol();
    for (k, lambda) in spectrum.eigenvalues().iter().enumerate() {
        let mag = lambda.abs();
        if mag <= tol {
            continue;
        }
        if mag < 10.0 * tol {
            gap_warning = true;
        }
        let vec = spectrum.eigenvector(k);
        let coeff = -crate::linalg::dot(vec, g.components()) / lambda;
        crate::linalg::add_scaled(&mut delta, vec, coeff);
    }
    NewtonCorrection { delta, gap_warning }
}

/// Norm of the gradient's projection outside the nullspace; the corrector's
/// convergence measure.
pub fn complement_gradient_norm(g: &Gradient, spectrum: &HessianSpectrum) -> f64 {
    let mut acc = 0.0;
    for k in spectrum.null_dim()..DIM {
        let c = crate::linalg::dot(spectrum.eigenvector(k), g.components());
        acc += c * c;
    }
    acc.sqrt()
}

/// Cyclic Jacobi diagonalization of a symmetric matrix.
///
/// Sweeps the strict upper triangle in a fixed row-major order until the
/// off-diagonal Frobenius norm drops below [`OFF_DIAGONAL_TOL`]. Returns
/// eigenvalues (unsorted) and the orthogonal matrix whose *columns* are the
/// matching eigenvectors.
pub(crate) fn jacobi_eigen<const K: usize>(
    mut a: [[f64; K]; K],
) -> Result<([f64; K], [[f64; K]; K])> {
    let mut v = [[0.0; K]; K];
    for (i, row) in v.iter_mut().enumerate() {
        row[i] = 1.0;
    }

    for _ in 0..MAX_SWEEPS {
        if off_diagonal_norm(&a) <= OFF_DIAGONAL_TOL {
            let mut values = [0.0; K];
            for (i, slot) in values.iter_mut().enumerate() {
                *slot = a[i][i];
            }
            return Ok((values, v));
        }
        for p in 0..K {
            for q in (p + 1)..K {
                let apq = a[p][q];
                if apq == 0.0 {
                    continue;
                }
                // tan of the rotation angle zeroing a[p][q] (smaller root)
                let theta = (a[q][q] - a[p][p]) / (2.0 * apq);
                let t = if theta >= 0.0 {
                    1.0 / (theta + (theta * theta + 1.0).sqrt())
                } else {
                    1.0 / (theta - (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;

                let app = a[p][p];
                let aqq = a[q][q];
                a[p][p] = app - t * apq;
                a[q][q] = aqq + t * apq;
                a[p][q] = 0.0;
                a[q][p] = 0.0;
                for k in 0..K {
                    if k == p || k == q {
                        continue;
                    }
                    let akp = a[k][p];
                    let akq = a[k][q];
                    let new_p = c * akp - s * akq;
                    let new_q = s * akp + c * akq;
                    a[k][p] = new_p;
                    a[p][k] = new_p;
                    a[k][q] = new_q;
                    a[q][k] = new_q;
                }
                for row in &mut v {
                    let vp = row[p];
                    let vq = row[q];
                    row[p] = c * vp - s * vq;
                    row[q] = s * vp + c * vq;
                }
            }
        }
    }
    Err(Error::EigNotConverged {
        tol: OFF_DIAGONAL_TOL,
        sweeps: MAX_SWEEPS,
    })
}

fn off_diagonal_norm<const K: usize>(a: &[[f64; K]; K]) -> f64 {
    let mut acc = 0.0;
    for p in 0..K {
        for q in (p + 1)..K {
            acc += 2.0 * a[p][q] * a[p][q];
        }
    }
    acc.sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg;
    use crate::{catalog, objective};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::TAU;

    fn random_symmetric(rng: &mut ChaCha8Rng) -> Matrix25 {
        let mut m = [[0.0; DIM]; DIM];
        for a in 0..DIM {
            for b in a..DIM {
                let x = rng.gen_range(-1.0..1.0);
                m[a][b] = x;
                m[b][a] = x;
            }
        }
        m
    }

    #[test]
    fn diagonal_matrix_recovers_its_entries() {
        let mut m = [[0.0; DIM]; DIM];
        for (i, row) in m.iter_mut().enumerate() {
            row[i] = (i + 1) as f64;
        }
        let s = eig_sym(&m, DEFAULT_NULL_TOL).unwrap();
        for (k, l) in s.eigenvalues().iter().enumerate() {
            assert!((l - (k + 1) as f64).abs() < 1e-12);
            // coordinate eigenvectors up to sign
            let vec = s.eigenvector(k);
            assert!((vec[k].abs() - 1.0).abs() < 1e-12);
        }
        assert_eq!(s.null_dim(), 0);
    }

    #[test]
    fn reconstruction_and_orthonormality() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for _ in 0..10 {
            let m = random_symmetric(&mut rng);
            let s = eig_sym(&m, DEFAULT_NULL_TOL).unwrap();
            // pairwise orthonormal within 1e-10
            for a in 0..DIM {
                for b in a..DIM {
                    let d = linalg::dot(s.eigenvector(a), s.eigenvector(b));
                    let expected = if a == b { 1.0 } else { 0.0 };
                    assert!((d - expected).abs() < 1e-10);
                }
            }
            // Σ λ n̂ n̂ᵀ reproduces the input within 1e-9
            let mut rebuilt = [[0.0; DIM]; DIM];
            for k in 0..DIM {
                let vec = s.eigenvector(k);
                for a in 0..DIM {
                    for b in 0..DIM {
                        rebuilt[a][b] += s.eigenvalues()[k] * vec[a] * vec[b];
                    }
                }
            }
            for a in 0..DIM {
                for b in 0..DIM {
                    assert!((rebuilt[a][b] - m[a][b]).abs() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn asymmetric_input_rejected() {
        let mut m = [[0.0; DIM]; DIM];
        m[0][1] = 1.0;
        m[1][0] = 1.0 + 1e-6;
        assert!(matches!(
            eig_sym(&m, DEFAULT_NULL_TOL),
            Err(Error::NotSymmetric { .. })
        ));
        m[1][0] = f64::NAN;
        assert!(matches!(
            eig_sym(&m, DEFAULT_NULL_TOL),
            Err(Error::NonFiniteMatrix)
        ));
    }

    #[test]
    fn decomposition_is_deterministic() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let m = random_symmetric(&mut rng);
        let a = eig_sym(&m, DEFAULT_NULL_TOL).unwrap();
        let b = eig_sym(&m, DEFAULT_NULL_TOL).unwrap();
        assert_eq!(a.eigenvalues(), b.eigenvalues());
        for k in 0..DIM {
            assert_eq!(a.eigenvector(k), b.eigenvector(k));
        }
    }

    #[test]
    fn fourier_hessian_has_clean_4d_nullspace() {
        let h = objective::hessian(&catalog::fourier());
        let s = eig_hessian(&h, DEFAULT_NULL_TOL).unwrap();
        assert_eq!(s.null_dim(), 4);
        assert!(s.has_clean_gap(), "fifth-smallest |λ| = {}", s.fifth_smallest_abs());
    }

    #[test]
    fn catalog_nullspace_dimensions() {
        // Every catalog Hadamard except Tao's has a 4-dimensional nullspace;
        // Tao's matrix is isolated and has none.
        let mut rng = ChaCha8Rng::seed_from_u64(43);
        for _ in 0..5 {
            let (a, b) = (rng.gen_range(0.0..TAU), rng.gen_range(0.0..TAU));
            for phi in [
                catalog::fourier_family(a, b),
                catalog::fourier_transpose_family(a, b),
            ] {
                let s = eig_hessian(&objective::hessian(&phi), DEFAULT_NULL_TOL).unwrap();
                assert_eq!(s.null_dim(), 4);
            }
        }
        let tao = eig_hessian(&objective::hessian(&catalog::tao().unwrap()), DEFAULT_NULL_TOL)
            .unwrap();
        assert_ne!(tao.null_dim(), 4);
        assert_eq!(tao.null_dim(), 0);
    }

    #[test]
    fn projector_rank_and_idempotence() {
        let s = eig_hessian(&objective::hessian(&catalog::fourier()), DEFAULT_NULL_TOL).unwrap();
        let p = nullspace_projector(&s);
        assert_eq!(p.rank(), 4);
        // P·P = P within 1e-10
        let m = p.matrix();
        for a in 0..DIM {
            for b in 0..DIM {
                let mut pp = 0.0;
                for k in 0..DIM {
                    pp += m[a][k] * m[k][b];
                }
                assert!((pp - m[a][b]).abs() < 1e-10);
            }
        }
        // symmetric
        for a in 0..DIM {
            for b in 0..DIM {
                assert!((m[a][b] - m[b][a]).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn projector_fixes_the_initial_directions_at_fourier() {
        let s = eig_hessian(&objective::hessian(&catalog::fourier()), DEFAULT_NULL_TOL).unwrap();
        let p = nullspace_projector(&s);
        for dir in &catalog::initial_directions() {
            let projected = p.apply(dir);
            for (a, b) in projected.iter().zip(dir) {
                assert!((a - b).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn projector_is_basis_independent() {
        // Rotating the degenerate null block must not change P.
        let s = eig_hessian(&objective::hessian(&catalog::fourier()), DEFAULT_NULL_TOL).unwrap();
        let p = nullspace_projector(&s);

        let mut rotated = s.clone();
        let mut rng = ChaCha8Rng::seed_from_u64(44);
        for _ in 0..8 {
            let i = rng.gen_range(0..4);
            let mut j = rng.gen_range(0..4);
            if i == j {
                j = (j + 1) % 4;
            }
            let angle: f64 = rng.gen_range(0.0..TAU);
            let (sn, cs) = angle.sin_cos();
            let vi = rotated.eigenvectors[i];
            let vj = rotated.eigenvectors[j];
            for k in 0..DIM {
                rotated.eigenvectors[i][k] = cs * vi[k] - sn * vj[k];
                rotated.eigenvectors[j][k] = sn * vi[k] + cs * vj[k];
            }
        }
        let p2 = nullspace_projector(&rotated);
        for a in 0..DIM {
            for b in 0..DIM {
                assert!((p.matrix()[a][b] - p2.matrix()[a][b]).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn newton_correction_of_zero_gradient_is_zero() {
        let s = eig_hessian(&objective::hessian(&catalog::fourier()), DEFAULT_NULL_TOL).unwrap();
        let g = objective::gradient(&catalog::fourier());
        // The Fourier gradient is numerically zero, so the correction is too.
        let nc = newton_correction(&g, &s);
        assert!(linalg::norm(&nc.delta) < 1e-12);
        assert!(!nc.gap_warning);
    }

    #[test]
    fn newton_correction_lies_in_the_complement() {
        let mut rng = ChaCha8Rng::seed_from_u64(45);
        let s = eig_hessian(&objective::hessian(&catalog::fourier()), DEFAULT_NULL_TOL).unwrap();
        let p = nullspace_projector(&s);
        for _ in 0..10 {
            let mut phases = [0.0; DIM];
            for x in &mut phases {
                *x = rng.gen_range(0.0..TAU);
            }
            let g = objective::gradient(&crate::phase_space::PhaseVector::new(phases).unwrap());
            let nc = newton_correction(&g, &s);
            let leaked = linalg::norm(&p.apply(&nc.delta));
            assert!(leaked <= 1e-10 * linalg::norm(&nc.delta).max(1e-300));
        }
    }

    #[test]
    fn predictor_step_correction_is_small() {
        // After a 0.001 predictor step from Fourier the Newton correction is
        // at most 1% of the step length.
        let dirs = catalog::initial_directions();
        let mut combined = [0.0; DIM];
        linalg::add_scaled(&mut combined, &dirs[1], 1.0);
        linalg::add_scaled(&mut combined, &dirs[2], 1.0);
        let unit = linalg::scaled(&combined, 1.0 / linalg::norm(&combined));
        let moved = catalog::fourier().offset_by(&unit, 0.001);
        let ev = objective::evaluate(&moved);
        let s = eig_hessian(&ev.hessian, DEFAULT_NULL_TOL).unwrap();
        let nc = newton_correction(&ev.gradient, &s);
        assert!(linalg::norm(&nc.delta) <= 1e-5, "|Δ| = {}", linalg::norm(&nc.delta));
    }
}
