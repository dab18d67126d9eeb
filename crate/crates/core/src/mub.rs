//! Unbiasedness metrics between bases and MUB-set reporting.
//!
//! Two orthonormal bases are mutually unbiased when every cross-probability
//! `|⟨a_m|b_n⟩|²` equals `1/6`. The defect reported here is the worst-case
//! deviation of a single probability, so thresholds read directly as
//! per-probability error bounds.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::phase_space::EquimodularMatrix;
use crate::{ComplexMatrix, Error, Result, ORDER};

/// Pair defect below which a pair counts as unbiased in reports.
pub const DEFAULT_UNBIASED_TOL: f64 = 1e-6;

/// Max Gram deviation a strict [`Basis`] may carry.
pub const ORTHONORMALITY_TOL: f64 = 1e-9;

/// An orthonormal basis of six complex vectors with a label for reports.
#[derive(Debug, Clone)]
pub struct Basis {
    label: String,
    /// `vectors[m]` is the m-th basis vector.
    vectors: [[Complex64; ORDER]; ORDER],
}

impl Basis {
    /// Validate orthonormality within [`ORTHONORMALITY_TOL`].
    pub fn new(label: impl Into<String>, vectors: [[Complex64; ORDER]; ORDER]) -> Result<Self> {
        Self::with_orthonormality_tol(label, vectors, ORTHONORMALITY_TOL)
    }

    /// Validate orthonormality within an explicit tolerance.
    ///
    /// Hadamards produced by numerical continuation carry a column-Gram
    /// error of order `√(f/18)`, far above [`ORTHONORMALITY_TOL`] even at
    /// `f = 1e-12`; pass a tolerance consistent with the accepted
    /// non-unitarity when wrapping such columns.
    pub fn with_orthonormality_tol(
        label: impl Into<String>,
        vectors: [[Complex64; ORDER]; ORDER],
        tol: f64,
    ) -> Result<Self> {
        let label = label.into();
        let mut deviation: f64 = 0.0;
        for m in 0..ORDER {
            for n in 0..ORDER {
                let g = inner(&vectors[m], &vectors[n]);
                let expected = if m == n { 1.0 } else { 0.0 };
                deviation = deviation.max((g - expected).norm());
            }
        }
        if deviation > tol {
            return Err(Error::NotOrthonormal {
                label,
                deviation,
                limit: tol,
            });
        }
        Ok(Self { label, vectors })
    }

    /// The standard (computational) basis.
    pub fn standard() -> Self {
        let mut vectors = [[Complex64::ZERO; ORDER]; ORDER];
        for (m, v) in vectors.iter_mut().enumerate() {
            v[m] = Complex64::new(1.0, 0.0);
        }
        Self {
            label: "standard".into(),
            vectors,
        }
    }

    /// Basis formed by the columns of a (near-)unitary matrix.
    pub fn from_matrix_columns(label: impl Into<String>, matrix: &ComplexMatrix) -> Result<Self> {
        Self::from_matrix_columns_with_tol(label, matrix, ORTHONORMALITY_TOL)
    }

    pub fn from_matrix_columns_with_tol(
        label: impl Into<String>,
        matrix: &ComplexMatrix,
        tol: f64,
    ) -> Result<Self> {
        let mut vectors = [[Complex64::ZERO; ORDER]; ORDER];
        for (m, v) in vectors.iter_mut().enumerate() {
            for (i, row) in matrix.iter().enumerate() {
                v[i] = row[m];
            }
        }
        Self::with_orthonormality_tol(label, vectors, tol)
    }

    /// Columns of a dephased equi-modular matrix (a verified Hadamard).
    pub fn from_equimodular(label: impl Into<String>, m: &EquimodularMatrix) -> Result<Self> {
        Self::from_matrix_columns(label, m.entries())
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn vector(&self, m: usize) -> &[Complex64; ORDER] {
        &self.vectors[m]
    }
}

fn inner(a: &[Complex64; ORDER], b: &[Complex64; ORDER]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// Worst-case deviation of a cross-probability from `1/6`:
/// `max_{m,n} | |⟨a_m|b_n⟩|² − 1/6 |`. Zero exactly when the bases are
/// mutually unbiased; a basis against itself scores `5/6`.
pub fn unbiasedness_defect(a: &Basis, b: &Basis) -> f64 {
    let uniform = 1.0 / ORDER as f64;
    let mut defect: f64 = 0.0;
    for am in &a.vectors {
        for bn in &b.vectors {
            let p = inner(am, bn).norm_sqr();
            defect = defect.max((p - uniform).abs());
        }
    }
    defect
}

/// Pairwise unbiasedness summary for a collection of bases.
///
/// Serialized as `{ "labels", "defects", "tolerance", "is_mub_set" }`;
/// the unbiased-pair count is derivable from the matrix and not part of
/// the file schema.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MubReport {
    pub labels: Vec<String>,
    /// Full symmetric defect matrix, including the `5/6` diagonal.
    pub defects: Vec<Vec<f64>>,
    pub tolerance: f64,
    pub is_mub_set: bool,
    /// Distinct pairs with defect at or below the tolerance.
    #[serde(skip)]
    pub unbiased_pairs: usize,
}

/// Pairwise defect matrix over `bases`, the count of unbiased pairs at
/// `tolerance`, and whether the whole collection is a MUB set.
pub fn mub_report(bases: &[Basis], tolerance: f64) -> Result<MubReport> {
    if bases.len() < 2 {
        return Err(Error::TooFewBases { got: bases.len() });
    }
    let k = bases.len();
    let mut defects = vec![vec![0.0; k]; k];
    for i in 0..k {
        for j in i..k {
            let d = unbiasedness_defect(&bases[i], &bases[j]);
            defects[i][j] = d;
            defects[j][i] = d;
        }
    }
    let mut unbiased_pairs = 0;
    let mut is_mub_set = true;
    for i in 0..k {
        for j in (i + 1)..k {
            if defects[i][j] <= tolerance {
                unbiased_pairs += 1;
            } else {
                is_mub_set = false;
            }
        }
    }
    Ok(MubReport {
        labels: bases.iter().map(|b| b.label.clone()).collect(),
        defects,
        tolerance,
        is_mub_set,
        unbiased_pairs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phase_space::{matrix_from_phases, PhaseVector};
    use crate::{catalog, objective};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::TAU;

    fn fourier_basis() -> Basis {
        Basis::from_equimodular("fourier", &matrix_from_phases(&catalog::fourier())).unwrap()
    }

    #[test]
    fn standard_vs_fourier_is_unbiased() {
        let d = unbiasedness_defect(&Basis::standard(), &fourier_basis());
        assert!(d <= 1e-12, "defect {d}");
    }

    #[test]
    fn basis_against_itself() {
        let b = fourier_basis();
        let d = unbiasedness_defect(&b, &b);
        assert!((d - 5.0 / 6.0).abs() < 1e-12);
    }

    #[test]
    fn defect_is_symmetric_and_gauge_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(51);
        let a = Basis::from_equimodular(
            "family",
            &matrix_from_phases(&catalog::fourier_family(1.0, 0.5)),
        )
        .unwrap();
        let b = fourier_basis();
        let base = unbiasedness_defect(&a, &b);
        assert_eq!(base, unbiasedness_defect(&b, &a));

        // per-vector phases and vector order change nothing
        let mut vectors = b.vectors;
        vectors.swap(0, 4);
        vectors.swap(2, 3);
        for v in &mut vectors {
            let phase = Complex64::from_polar(1.0, rng.gen_range(0.0..TAU));
            for e in v.iter_mut() {
                *e *= phase;
            }
        }
        let shuffled = Basis::new("shuffled", vectors).unwrap();
        assert!((unbiasedness_defect(&a, &shuffled) - base).abs() < 1e-12);
    }

    #[test]
    fn equimodular_columns_are_unbiased_to_standard() {
        let mut rng = ChaCha8Rng::seed_from_u64(52);
        for _ in 0..10 {
            let phi = catalog::fourier_family(rng.gen_range(0.0..TAU), rng.gen_range(0.0..TAU));
            assert!(objective::f(&phi) <= 1e-10);
            let b = Basis::from_equimodular("h", &matrix_from_phases(&phi)).unwrap();
            assert!(unbiasedness_defect(&Basis::standard(), &b) <= 1e-10);
        }
    }

    #[test]
    fn non_orthonormal_rejected() {
        let mut vectors = Basis::standard().vectors;
        vectors[1] = vectors[0];
        assert!(matches!(
            Basis::new("dup", vectors),
            Err(Error::NotOrthonormal { .. })
        ));
    }

    #[test]
    fn report_standard_fourier() {
        let report = mub_report(
            &[Basis::standard(), fourier_basis()],
            DEFAULT_UNBIASED_TOL,
        )
        .unwrap();
        assert!(report.is_mub_set);
        assert_eq!(report.unbiased_pairs, 1);
        assert_eq!(report.labels, vec!["standard", "fourier"]);
    }

    #[test]
    fn report_with_duplicate_basis() {
        let report = mub_report(
            &[Basis::standard(), fourier_basis(), fourier_basis()],
            DEFAULT_UNBIASED_TOL,
        )
        .unwrap();
        assert!(!report.is_mub_set);
        assert_eq!(report.unbiased_pairs, 2);
        assert!((report.defects[1][2] - 5.0 / 6.0).abs() < 1e-12);
    }

    #[test]
    fn report_needs_two_bases() {
        assert!(matches!(
            mub_report(&[Basis::standard()], 1e-6),
            Err(Error::TooFewBases { got: 1 })
        ));
    }

    #[test]
    fn report_with_family_member() {
        let third = Basis::from_equimodular(
            "family",
            &matrix_from_phases(&catalog::fourier_family(1.0, 0.5)),
        )
        .unwrap();
        let report = mub_report(
            &[Basis::standard(), fourier_basis(), third],
            DEFAULT_UNBIASED_TOL,
        )
        .unwrap();
        // both Hadamards are unbiased to the standard basis; the
        // fourier/family pair defect is whatever direct evaluation gives
        assert!(report.defects[0][1] <= 1e-10);
        assert!(report.defects[0][2] <= 1e-10);
        assert!(report.defects[1][2] >= 0.0);
        assert_eq!(report.defects[1][2], report.defects[2][1]);
    }

    #[test]
    fn relaxed_tolerance_admits_near_unitary_columns() {
        // nudge one Fourier phase by 1e-5: f stays tiny but the Gram error
        // exceeds the strict tolerance
        let mut phases = *catalog::fourier().as_array();
        phases[7] += 1e-5;
        let m = matrix_from_phases(&PhaseVector::new(phases).unwrap());
        assert!(matches!(
            Basis::from_matrix_columns("near", m.entries()),
            Err(Error::NotOrthonormal { .. })
        ));
        let _ = Basis::from_matrix_columns_with_tol("near", m.entries(), 1e-4).unwrap();
    }
}
