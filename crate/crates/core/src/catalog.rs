//! Closed-form seed Hadamards and initial nullspace directions.
//!
//! Provides the Fourier matrix, its two 2-parameter affine families, the
//! four unit directions `φ̂_1..φ̂_4` along which the family parameters grow,
//! and Tao's matrix of third roots of unity (an isolated Hadamard whose
//! curvature nullspace is not 4-dimensional).

use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;

use crate::phase_space::PhaseVector;
use crate::{objective, Error, Result, Vector25, DIM, ORDER};

/// Rows (1-based) carrying the first family's `z1 = e^{iφ1}` factor.
const Z1_ROWS: [usize; 3] = [2, 4, 6];
/// Columns (1-based) carrying `z1`.
const Z1_COLS: [usize; 2] = [2, 5];
/// Rows carrying `z2 = e^{iφ2}`.
const Z2_ROWS: [usize; 3] = [2, 4, 6];
/// Columns carrying `z2`.
const Z2_COLS: [usize; 2] = [3, 6];

/// Tao's matrix as powers of `ω = e^{2πi/3}`, rows 2..=6 × columns 2..=6.
/// The table is validated at construction: building it must yield `f = 0`.
const TAO_EXPONENTS: [[u8; 5]; 5] = [
    [0, 1, 1, 2, 2],
    [1, 0, 2, 2, 1],
    [1, 2, 0, 1, 2],
    [2, 2, 1, 0, 1],
    [2, 1, 2, 1, 0],
];

fn fourier_phase(row: usize, col: usize) -> f64 {
    TAU * (((row - 1) * (col - 1)) % ORDER) as f64 / ORDER as f64
}

fn in_support(rows: &[usize], cols: &[usize], row: usize, col: usize) -> bool {
    rows.contains(&row) && cols.contains(&col)
}

/// Phases of the Fourier matrix, `φ_jm = 2π(j−1)(m−1)/6 mod 2π`.
pub fn fourier() -> PhaseVector {
    PhaseVector::from_fn(fourier_phase).expect("finite by construction")
}

/// Phases of the first Fourier family `F6(φ1, φ2)`: the Fourier phases with
/// `φ1` added on rows {2,4,6} × columns {2,5} and `φ2` on rows {2,4,6} ×
/// columns {3,6}.
pub fn fourier_family(phi1: f64, phi2: f64) -> PhaseVector {
    PhaseVector::from_fn(|row, col| {
        let mut p = fourier_phase(row, col);
        if in_support(&Z1_ROWS, &Z1_COLS, row, col) {
            p += phi1;
        }
        if in_support(&Z2_ROWS, &Z2_COLS, row, col) {
            p += phi2;
        }
        p
    })
    .expect("finite by construction")
}

/// Phases of the second Fourier family `F6ᵀ(φ3, φ4)`, the transpose of
/// [`fourier_family`] (already dephased, since transposition preserves the
/// gauge and the Fourier matrix is symmetric).
pub fn fourier_transpose_family(phi3: f64, phi4: f64) -> PhaseVector {
    PhaseVector::from_fn(|row, col| {
        let mut p = fourier_phase(col, row);
        if in_support(&Z1_ROWS, &Z1_COLS, col, row) {
            p += phi3;
        }
        if in_support(&Z2_ROWS, &Z2_COLS, col, row) {
            p += phi4;
        }
        p
    })
    .expect("finite by construction")
}

/// The four initial directions `φ̂_1..φ̂_4`: unit-normalized indicator
/// vectors of the supports on which the family parameters `φ1..φ4` act.
/// Each has six components equal to `1/√6`.
pub fn initial_directions() -> [Vector25; 4] {
    let value = 1.0 / (6.0_f64).sqrt();
    let mut dirs = [[0.0; DIM]; 4];
    let supports: [(&[usize], &[usize]); 4] = [
        (&Z1_ROWS, &Z1_COLS),
        (&Z2_ROWS, &Z2_COLS),
        // transposed supports for the second family
        (&Z1_COLS, &Z1_ROWS),
        (&Z2_COLS, &Z2_ROWS),
    ];
    for (dir, (rows, cols)) in dirs.iter_mut().zip(supports) {
        for &row in rows {
            for &col in cols {
                dir[(col - 2) * (ORDER - 1) + (row - 2)] = value;
            }
        }
    }
    dirs
}

/// Phases of Tao's matrix `S6`, entries `ω^{t_jm}/√6` with `ω = e^{2πi/3}`.
///
/// The exponent table ships as a fixture and is revalidated on every
/// construction; a transcription error would surface as
/// [`Error::FixtureSelfCheck`].
pub fn tao() -> Result<PhaseVector> {
    let phi = PhaseVector::from_fn(|row, col| {
        TAU * f64::from(TAO_EXPONENTS[row - 2][col - 2]) / 3.0
    })?;
    let f = objective::f(&phi);
    if f.abs() > 1e-12 {
        return Err(Error::FixtureSelfCheck { f });
    }
    Ok(phi)
}

/// Identifier of a catalog seed, with the affine-family parameters when the
/// family requires them.
///
/// The string grammar (used by the CLI and by serialized run manifests) is
/// `fourier`, `fourier-family:a,b`, `fourier-t-family:a,b`, and `tao`.
#[derive(Debug, Clone, PartialEq)]
pub enum SeedId {
    Fourier,
    FourierFamily { phi1: f64, phi2: f64 },
    FourierTransposeFamily { phi3: f64, phi4: f64 },
    Tao,
}

impl SeedId {
    /// The seed's phase vector; fails only on a fixture self-check failure.
    pub fn phases(&self) -> Result<PhaseVector> {
        match self {
            SeedId::Fourier => Ok(fourier()),
            SeedId::FourierFamily { phi1, phi2 } => Ok(fourier_family(*phi1, *phi2)),
            SeedId::FourierTransposeFamily { phi3, phi4 } => {
                Ok(fourier_transpose_family(*phi3, *phi4))
            }
            SeedId::Tao => tao(),
        }
    }
}

impl fmt::Display for SeedId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SeedId::Fourier => write!(f, "fourier"),
            SeedId::FourierFamily { phi1, phi2 } => write!(f, "fourier-family:{phi1},{phi2}"),
            SeedId::FourierTransposeFamily { phi3, phi4 } => {
                write!(f, "fourier-t-family:{phi3},{phi4}")
            }
            SeedId::Tao => write!(f, "tao"),
        }
    }
}

impl FromStr for SeedId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let unknown = || Error::UnknownSeedId(s.to_string());
        match s {
            "fourier" => return Ok(SeedId::Fourier),
            "tao" => return Ok(SeedId::Tao),
            _ => {}
        }
        let (name, params) = s.split_once(':').ok_or_else(unknown)?;
        let (a, b) = params.split_once(',').ok_or_else(unknown)?;
        let a: f64 = a.trim().parse().map_err(|_| unknown())?;
        let b: f64 = b.trim().parse().map_err(|_| unknown())?;
        if !a.is_finite() || !b.is_finite() {
            return Err(unknown());
        }
        match name {
            "fourier-family" => Ok(SeedId::FourierFamily { phi1: a, phi2: b }),
            "fourier-t-family" => Ok(SeedId::FourierTransposeFamily { phi3: a, phi4: b }),
            _ => Err(unknown()),
        }
    }
}

impl Serialize for SeedId {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for SeedId {
    fn deserialize<D: serde::Deserializer<'de>>(
        deserializer: D,
    ) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg;
    use crate::phase_space::{index_of, matrix_from_phases, INV_SQRT6};
    use num_complex::Complex64;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn fourier_is_hadamard() {
        assert!(objective::f(&fourier()).abs() <= 1e-12);
    }

    #[test]
    fn fourier_entry_3_3() {
        let m = matrix_from_phases(&fourier());
        let q4 = Complex64::from_polar(INV_SQRT6, 4.0 * TAU / 6.0);
        assert!((m.entry(3, 3) - q4).norm() < 1e-15);
    }

    #[test]
    fn families_reduce_to_fourier_at_zero() {
        assert_eq!(fourier_family(0.0, 0.0), fourier());
        assert_eq!(fourier_transpose_family(0.0, 0.0), fourier());
    }

    #[test]
    fn families_are_hadamard_everywhere() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..50 {
            let (a, b) = (rng.gen_range(0.0..TAU), rng.gen_range(0.0..TAU));
            assert!(objective::f(&fourier_family(a, b)) <= 1e-12);
            assert!(objective::f(&fourier_transpose_family(a, b)) <= 1e-12);
        }
    }

    #[test]
    fn family_entry_2_2_carries_z1() {
        let phi1 = 0.8;
        let m = matrix_from_phases(&fourier_family(phi1, 0.3));
        let expected = Complex64::from_polar(INV_SQRT6, TAU / 6.0 + phi1);
        assert!((m.entry(2, 2) - expected).norm() < 1e-15);
    }

    /// Entry-by-entry oracle: the family matrix written out literally with
    /// `q` powers and `z1`, `z2` placed per its closed form.
    #[test]
    fn family_matches_direct_substitution() {
        let q_pow = |k: u32, extra: f64| Complex64::from_polar(INV_SQRT6, TAU * f64::from(k) / 6.0 + extra);
        let mut rng = ChaCha8Rng::seed_from_u64(32);
        for _ in 0..10 {
            let (p1, p2) = (rng.gen_range(0.0..TAU), rng.gen_range(0.0..TAU));
            #[rustfmt::skip]
            let direct: [[Complex64; 6]; 6] = [
                [q_pow(0, 0.0), q_pow(0, 0.0), q_pow(0, 0.0), q_pow(0, 0.0), q_pow(0, 0.0), q_pow(0, 0.0)],
                [q_pow(0, 0.0), q_pow(1, p1),  q_pow(2, p2),  q_pow(3, 0.0), q_pow(4, p1),  q_pow(5, p2)],
                [q_pow(0, 0.0), q_pow(2, 0.0), q_pow(4, 0.0), q_pow(0, 0.0), q_pow(2, 0.0), q_pow(4, 0.0)],
                [q_pow(0, 0.0), q_pow(3, p1),  q_pow(0, p2),  q_pow(3, 0.0), q_pow(0, p1),  q_pow(3, p2)],
                [q_pow(0, 0.0), q_pow(4, 0.0), q_pow(2, 0.0), q_pow(0, 0.0), q_pow(4, 0.0), q_pow(2, 0.0)],
                [q_pow(0, 0.0), q_pow(5, p1),  q_pow(4, p2),  q_pow(3, 0.0), q_pow(2, p1),  q_pow(1, p2)],
            ];
            let m = matrix_from_phases(&fourier_family(p1, p2));
            let t = matrix_from_phases(&fourier_transpose_family(p1, p2));
            for i in 0..6 {
                for j in 0..6 {
                    assert!((m.entries()[i][j] - direct[i][j]).norm() < 1e-14);
                    assert!((t.entries()[i][j] - direct[j][i]).norm() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn transpose_family_phi3_support() {
        let probe = fourier_transpose_family(1.0, 0.0);
        let base = fourier();
        for col in 2..=6 {
            for row in 2..=6 {
                let d = probe.get(row, col).unwrap() - base.get(row, col).unwrap();
                let on_support = [2, 5].contains(&row) && [2, 4, 6].contains(&col);
                if on_support {
                    assert!((d - 1.0).abs() < 1e-15);
                } else {
                    assert_eq!(d, 0.0);
                }
            }
        }
    }

    #[test]
    fn initial_directions_have_the_documented_supports() {
        let dirs = initial_directions();
        let v = 1.0 / 6.0_f64.sqrt();
        // φ̂_1: components 1/√6 on rows {2,4,6} × columns {2,5}.
        let mut expected = [0.0; DIM];
        for &row in &[2, 4, 6] {
            for &col in &[2, 5] {
                expected[index_of(row, col).unwrap()] = v;
            }
        }
        assert_eq!(dirs[0], expected);
        for dir in &dirs {
            assert!((linalg::norm(dir) - 1.0).abs() < 1e-15);
            assert_eq!(dir.iter().filter(|&&x| x != 0.0).count(), 6);
        }
        // supports of φ̂_2 and φ̂_3 overlap at (row 2, col 6) only
        let overlap = linalg::dot(&dirs[1], &dirs[2]);
        assert!((overlap - 1.0 / 6.0).abs() < 1e-15);
        assert!(dirs[1][index_of(2, 6).unwrap()] != 0.0);
        assert!(dirs[2][index_of(2, 6).unwrap()] != 0.0);
    }

    #[test]
    fn tao_fixture_validates() {
        let phi = tao().unwrap();
        assert!(objective::f(&phi).abs() <= 1e-12);
        for p in phi.as_array() {
            let nearest = [0.0, TAU / 3.0, 2.0 * TAU / 3.0]
                .iter()
                .map(|r| (p - r).abs())
                .fold(f64::INFINITY, f64::min);
            assert!(nearest < 1e-15);
        }
    }

    #[test]
    fn seed_id_grammar_roundtrip() {
        let ids = [
            SeedId::Fourier,
            SeedId::Tao,
            SeedId::FourierFamily { phi1: 0.25, phi2: 1.5 },
            SeedId::FourierTransposeFamily { phi3: 0.1, phi4: 0.0 },
        ];
        for id in &ids {
            let s = id.to_string();
            let back: SeedId = s.parse().unwrap();
            assert_eq!(&back, id);
        }
        assert!("fourier-family:1.0".parse::<SeedId>().is_err());
        assert!("nope".parse::<SeedId>().is_err());
        assert!("fourier-family:a,b".parse::<SeedId>().is_err());
    }
}
