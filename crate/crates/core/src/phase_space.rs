//! The 25-phase coordinate system for dephased equi-modular 6×6 matrices.
//!
//! A 6×6 matrix of equi-modular entries `e^{iφ_im}/√6` in the dephased gauge
//! (`φ_1m = φ_i1 = 0`) is determined by the 25 interior phases. They are
//! stored column-major over matrix columns 2..=6, rows 2..=6 within each
//! column; every module in the crate shares this layout.

use num_complex::Complex64;
use serde::de::{self, Deserializer, SeqAccess, Visitor};
use serde::ser::{SerializeSeq, Serializer};
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

use crate::{ComplexMatrix, Error, Result, Vector25, DIM, ORDER};

/// `1/√6`, the common entry modulus.
pub const INV_SQRT6: f64 = 0.408_248_290_463_863_1;

/// Modulus spread tolerated when importing an arbitrary complex matrix.
pub const EQUIMODULAR_IMPORT_TOL: f64 = 1e-9;

/// Modulus deviation tolerated by the [`EquimodularMatrix`] invariant.
pub const EQUIMODULAR_MATRIX_TOL: f64 = 1e-12;

/// Flat index of the phase at (`row`, `col`), both 1-based in 2..=6.
///
/// The layout is column-major: `(col - 2) * 5 + (row - 2)`.
pub fn index_of(row: usize, col: usize) -> Result<usize> {
    if !(2..=ORDER).contains(&row) || !(2..=ORDER).contains(&col) {
        return Err(Error::IndexOutOfRange { row, col });
    }
    Ok((col - 2) * (ORDER - 1) + (row - 2))
}

/// Reduce a phase to the canonical interval `[0, 2π)`.
pub fn wrap_phase(x: f64) -> f64 {
    let w = x.rem_euclid(TAU);
    // rem_euclid can round a tiny negative input up to exactly 2π.
    if w >= TAU {
        0.0
    } else {
        w
    }
}

/// The 25 free phases of a dephased equi-modular matrix.
///
/// Phases are kept unwrapped in arithmetic so that integrated trajectories
/// stay continuous; the canonical `[0, 2π)` form is produced by
/// [`PhaseVector::canonical`] and used whenever a phase vector is serialized.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseVector {
    phases: Vector25,
}

impl PhaseVector {
    /// Wrap an array of 25 phases, rejecting non-finite components.
    pub fn new(phases: Vector25) -> Result<Self> {
        if let Some(index) = phases.iter().position(|p| !p.is_finite()) {
            return Err(Error::NonFinitePhase { index });
        }
        Ok(Self { phases })
    }

    pub fn zero() -> Self {
        Self { phases: [0.0; DIM] }
    }

    /// Build from a function of (`row`, `col`), both 1-based in 2..=6.
    pub fn from_fn(mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let mut phases = [0.0; DIM];
        for col in 2..=ORDER {
            for row in 2..=ORDER {
                phases[(col - 2) * (ORDER - 1) + (row - 2)] = f(row, col);
            }
        }
        Self::new(phases)
    }

    pub fn from_slice(phases: &[f64]) -> Result<Self> {
        let arr: Vector25 = phases.try_into().map_err(|_| Error::PhaseCount {
            expected: DIM,
            got: phases.len(),
        })?;
        Self::new(arr)
    }

    /// Phase at (`row`, `col`), both 1-based in 2..=6.
    pub fn get(&self, row: usize, col: usize) -> Result<f64> {
        Ok(self.phases[index_of(row, col)?])
    }

    pub fn as_array(&self) -> &Vector25 {
        &self.phases
    }

    /// Copy with every phase reduced to `[0, 2π)`.
    pub fn canonical(&self) -> Self {
        let mut phases = self.phases;
        for p in &mut phases {
            *p = wrap_phase(*p);
        }
        Self { phases }
    }

    /// `self + s * direction`, without wrapping.
    pub fn offset_by(&self, direction: &Vector25, s: f64) -> Self {
        let mut phases = self.phases;
        for (p, d) in phases.iter_mut().zip(direction) {
            *p += s * d;
        }
        Self { phases }
    }

    /// Full 6×6 phase table (0-based), first row and column zero.
    pub fn phase_table(&self) -> [[f64; ORDER]; ORDER] {
        let mut table = [[0.0; ORDER]; ORDER];
        for col in 1..ORDER {
            for row in 1..ORDER {
                table[row][col] = self.phases[(col - 1) * (ORDER - 1) + (row - 1)];
            }
        }
        table
    }
}

// Serialized phase vectors are always canonical: [0, 2π), 25 entries.
impl Serialize for PhaseVector {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = serializer.serialize_seq(Some(DIM))?;
        for p in &self.phases {
            seq.serialize_element(&wrap_phase(*p))?;
        }
        seq.end()
    }
}

impl<'de> Deserialize<'de> for PhaseVector {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        struct PhaseVisitor;

        impl<'de> Visitor<'de> for PhaseVisitor {
            type Value = PhaseVector;

            fn expecting(&self, f: &mut std::fmt::Formatter) -> std::fmt::Result {
                write!(f, "a sequence of {DIM} finite phases")
            }

            fn visit_seq<A: SeqAccess<'de>>(
                self,
                mut seq: A,
            ) -> std::result::Result<PhaseVector, A::Error> {
                let mut phases = [0.0; DIM];
                for (i, slot) in phases.iter_mut().enumerate() {
                    *slot = seq
                        .next_element::<f64>()?
                        .ok_or_else(|| de::Error::invalid_length(i, &self))?;
                }
                if seq.next_element::<f64>()?.is_some() {
                    return Err(de::Error::invalid_length(DIM + 1, &self));
                }
                PhaseVector::new(phases).map_err(de::Error::custom)
            }
        }

        deserializer.deserialize_seq(PhaseVisitor)
    }
}

/// A 6×6 complex matrix with all entries of modulus `1/√6` and the first row
/// and column real positive (dephased gauge).
#[derive(Debug, Clone, PartialEq)]
pub struct EquimodularMatrix {
    entries: ComplexMatrix,
}

impl EquimodularMatrix {
    /// Validate both invariants on raw entries: every modulus within
    /// [`EQUIMODULAR_MATRIX_TOL`] of `1/√6`, first row and column exactly
    /// `1/√6`.
    pub fn try_from_entries(entries: ComplexMatrix) -> Result<Self> {
        let mut spread: f64 = 0.0;
        for row in &entries {
            for e in row {
                spread = spread.max((e.norm() - INV_SQRT6).abs());
            }
        }
        if spread > EQUIMODULAR_MATRIX_TOL {
            return Err(Error::NotEquimodular {
                spread,
                limit: EQUIMODULAR_MATRIX_TOL,
            });
        }
        for k in 0..ORDER {
            for (row, col) in [(0, k), (k, 0)] {
                let e = entries[row][col];
                if e.re != INV_SQRT6 || e.im != 0.0 {
                    return Err(Error::NotDephased {
                        row: row + 1,
                        col: col + 1,
                    });
                }
            }
        }
        Ok(Self { entries })
    }

    pub fn entries(&self) -> &ComplexMatrix {
        &self.entries
    }

    /// Entry at (`row`, `col`), both 1-based in 1..=6.
    pub fn entry(&self, row: usize, col: usize) -> Complex64 {
        self.entries[row - 1][col - 1]
    }
}

/// Build the matrix `e^{iφ_im}/√6` from its free phases.
pub fn matrix_from_phases(phi: &PhaseVector) -> EquimodularMatrix {
    let gauge = Complex64::new(INV_SQRT6, 0.0);
    let mut entries = [[gauge; ORDER]; ORDER];
    let table = phi.phase_table();
    for row in 1..ORDER {
        for col in 1..ORDER {
            entries[row][col] = Complex64::from_polar(INV_SQRT6, table[row][col]);
        }
    }
    EquimodularMatrix { entries }
}

/// Dephase an equi-modular complex matrix and read off its 25 free phases.
///
/// Rows and then columns are multiplied by unit phases until the first column
/// and row are real positive; the interior phases are returned wrapped to
/// `[0, 2π)`. Idempotent on already-dephased matrices. Entries must be
/// nonzero with moduli equal within [`EQUIMODULAR_IMPORT_TOL`].
pub fn phases_from_matrix(m: &ComplexMatrix) -> Result<PhaseVector> {
    let mut min_mod = f64::INFINITY;
    let mut max_mod = f64::NEG_INFINITY;
    for (i, row) in m.iter().enumerate() {
        for (j, e) in row.iter().enumerate() {
            let n = e.norm();
            if n == 0.0 {
                return Err(Error::ZeroEntry {
                    row: i + 1,
                    col: j + 1,
                });
            }
            min_mod = min_mod.min(n);
            max_mod = max_mod.max(n);
        }
    }
    if max_mod - min_mod > EQUIMODULAR_IMPORT_TOL {
        return Err(Error::NotEquimodular {
            spread: max_mod - min_mod,
            limit: EQUIMODULAR_IMPORT_TOL,
        });
    }

    // Row factors make the first column real positive, column factors then
    // fix the first row; entry (1,1) is already real positive after the row
    // pass, so the first column factor is the identity.
    let row_factor: Vec<Complex64> = (0..ORDER).map(|i| (m[i][0] / m[i][0].norm()).conj()).collect();
    let col_factor: Vec<Complex64> = (0..ORDER)
        .map(|j| {
            let e = m[0][j] * row_factor[0];
            (e / e.norm()).conj()
        })
        .collect();

    PhaseVector::from_fn(|row, col| {
        let e = m[row - 1][col - 1] * row_factor[row - 1] * col_factor[col - 1];
        wrap_phase(e.arg())
    })
}

/// Non-unitarity of the column Gram matrix: `(N/2) Σ_{n>m} |⟨e_m|e_n⟩|²`.
///
/// Zero exactly when the matrix is unitary, i.e. a Hadamard. Equals
/// `objective::f` of the matrix phases divided by `N = 6`.
pub fn gram_defect(m: &EquimodularMatrix) -> f64 {
    column_gram_defect(&m.entries)
}

/// [`gram_defect`] on raw entries, without requiring the dephased gauge.
///
/// Assumes entries of modulus `1/√6` (unit columns); it is invariant under
/// row/column permutations and unit-phase rescaling of rows or columns.
pub fn column_gram_defect(entries: &ComplexMatrix) -> f64 {
    let mut acc = 0.0;
    for m in 0..ORDER {
        for n in (m + 1)..ORDER {
            let mut inner = Complex64::ZERO;
            for row in entries {
                inner += row[m].conj() * row[n];
            }
            acc += inner.norm_sqr();
        }
    }
    (ORDER as f64 / 2.0) * acc
}
