//! Closed-form non-unitarity and its derivatives over the 25 free phases.
//!
//! With `★ = φ_in − φ_im + φ_jm − φ_jn` (indices over 1..=6, any index-1
//! phase fixed to zero), the non-unitarity is
//!
//! ```text
//! f(φ) = Σ_{n>m} Σ_{j>i} cos(★)  +  Σ_{n>m} Σ_{j=i} 1/2
//! ```
//!
//! It vanishes exactly on Hadamards and equals `6 ·` the column Gram defect
//! of [`crate::phase_space::gram_defect`]. The gradient and Hessian follow
//! from the chain rule; every derivative term carries a `sin(★)` or `cos(★)`
//! of the same quadruple-phase argument, so a combined evaluation shares one
//! trig pass over the 15×15 row/column pair grid.

use crate::phase_space::PhaseVector;
use crate::{Matrix25, Vector25, DIM, ORDER};

/// Constant term of `f`: 15 column pairs × 6 diagonal row terms × 1/2.
const F_CONSTANT: f64 = 45.0;

/// Analytic gradient of the non-unitarity, indexed like a phase vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradient {
    components: Vector25,
}

impl Gradient {
    pub fn components(&self) -> &Vector25 {
        &self.components
    }

    pub fn max_abs(&self) -> f64 {
        self.components.iter().fold(0.0, |m, c| m.max(c.abs()))
    }

    pub fn norm(&self) -> f64 {
        self.components.iter().map(|c| c * c).sum::<f64>().sqrt()
    }
}

/// Analytic Hessian of the non-unitarity; exactly symmetric by construction
/// (each entry is accumulated once in the upper triangle and mirrored).
#[derive(Debug, Clone, PartialEq)]
pub struct Hessian {
    entries: Matrix25,
}

impl Hessian {
    /// Accept raw entries, rejecting asymmetry beyond 1e-9 and then
    /// mirroring the upper triangle so the invariant holds exactly.
    pub fn try_from_entries(entries: Matrix25) -> crate::Result<Self> {
        let mut asymmetry: f64 = 0.0;
        for a in 0..DIM {
            for b in (a + 1)..DIM {
                asymmetry = asymmetry.max((entries[a][b] - entries[b][a]).abs());
            }
        }
        if asymmetry > 1e-9 {
            return Err(crate::Error::NotSymmetric { asymmetry });
        }
        let mut entries = entries;
        for a in 0..DIM {
            for b in (a + 1)..DIM {
                entries[b][a] = entries[a][b];
            }
        }
        Ok(Self { entries })
    }

    pub fn entries(&self) -> &Matrix25 {
        &self.entries
    }
}

/// Non-unitarity, gradient, and Hessian evaluated at one point.
#[derive(Debug, Clone)]
pub struct Evaluation {
    pub f: f64,
    pub gradient: Gradient,
    pub hessian: Hessian,
}

/// Flat phase index for 0-based `row`, `col` in 1..=5.
#[inline]
fn flat(row: usize, col: usize) -> usize {
    (col - 1) * (ORDER - 1) + (row - 1)
}

/// Non-unitarity `f(φ) ≥ 0`; zero exactly on Hadamards.
pub fn f(phi: &PhaseVector) -> f64 {
    let table = phi.phase_table();
    let mut acc = 0.0;
    for m in 0..ORDER {
        for n in (m + 1)..ORDER {
            for i in 0..ORDER {
                for j in (i + 1)..ORDER {
                    acc += (table[i][n] - table[i][m] + table[j][m] - table[j][n]).cos();
                }
            }
        }
    }
    acc + F_CONSTANT
}

/// Analytic gradient of [`f`].
pub fn gradient(phi: &PhaseVector) -> Gradient {
    let table = phi.phase_table();
    let mut g = [0.0; DIM];
    for m in 0..ORDER {
        for n in (m + 1)..ORDER {
            for i in 0..ORDER {
                for j in (i + 1)..ORDER {
                    let s = (table[i][n] - table[i][m] + table[j][m] - table[j][n]).sin();
                    accumulate_gradient(&mut g, s, i, j, m, n);
                }
            }
        }
    }
    Gradient { components: g }
}

/// Analytic Hessian of [`f`].
pub fn hessian(phi: &PhaseVector) -> Hessian {
    let table = phi.phase_table();
    let mut h = [[0.0; DIM]; DIM];
    for m in 0..ORDER {
        for n in (m + 1)..ORDER {
            for i in 0..ORDER {
                for j in (i + 1)..ORDER {
                    let c = (table[i][n] - table[i][m] + table[j][m] - table[j][n]).cos();
                    accumulate_hessian_upper(&mut h, c, i, j, m, n);
                }
            }
        }
    }
    mirror_lower(&mut h);
    Hessian { entries: h }
}

/// Evaluate `f`, gradient, and Hessian together, computing each `sin`/`cos`
/// of the quadruple-phase argument once. This is the integrator's hot path.
pub fn evaluate(phi: &PhaseVector) -> Evaluation {
    let table = phi.phase_table();
    let mut acc = 0.0;
    let mut g = [0.0; DIM];
    let mut h = [[0.0; DIM]; DIM];
    for m in 0..ORDER {
        for n in (m + 1)..ORDER {
            for i in 0..ORDER {
                for j in (i + 1)..ORDER {
                    let star = table[i][n] - table[i][m] + table[j][m] - table[j][n];
                    let (s, c) = star.sin_cos();
                    acc += c;
                    accumulate_gradient(&mut g, s, i, j, m, n);
                    accumulate_hessian_upper(&mut h, c, i, j, m, n);
                }
            }
        }
    }
    mirror_lower(&mut h);
    Evaluation {
        f: acc + F_CONSTANT,
        gradient: Gradient { components: g },
        hessian: Hessian { entries: h },
    }
}

/// One (m,n,i,j) term of the gradient: the Kronecker deltas of
/// `−(δ_ik − δ_jk)(δ_no − δ_mo) sin(★)` select rows {i,j} and columns {n,m}
/// with signs (+,−); contributions with a fixed index (row or column 1,
/// i.e. 0-based 0) are dropped because those phases are not coordinates.
#[inline]
fn accumulate_gradient(g: &mut Vector25, s: f64, i: usize, j: usize, m: usize, n: usize) {
    for (row, row_sign) in [(i, 1.0), (j, -1.0)] {
        if row == 0 {
            continue;
        }
        for (col, col_sign) in [(n, 1.0), (m, -1.0)] {
            if col == 0 {
                continue;
            }
            g[flat(row, col)] -= row_sign * col_sign * s;
        }
    }
}

/// One (m,n,i,j) term of the Hessian, upper triangle only (the mirror image
/// of each off-diagonal contribution appears as a separate delta combination
/// and is skipped, then restored by [`mirror_lower`]).
#[inline]
fn accumulate_hessian_upper(h: &mut Matrix25, c: f64, i: usize, j: usize, m: usize, n: usize) {
    for (row_a, sign_ra) in [(i, 1.0), (j, -1.0)] {
        if row_a == 0 {
            continue;
        }
        for (col_a, sign_ca) in [(n, 1.0), (m, -1.0)] {
            if col_a == 0 {
                continue;
            }
            let a = flat(row_a, col_a);
            for (row_b, sign_rb) in [(i, 1.0), (j, -1.0)] {
                if row_b == 0 {
                    continue;
                }
                for (col_b, sign_cb) in [(n, 1.0), (m, -1.0)] {
                    if col_b == 0 {
                        continue;
                    }
                    let b = flat(row_b, col_b);
                    if b >= a {
                        h[a][b] -= sign_ra * sign_ca * sign_rb * sign_cb * c;
                    }
                }
            }
        }
    }
}

fn mirror_lower(h: &mut Matrix25) {
    for a in 0..DIM {
        for b in (a + 1)..DIM {
            h[b][a] = h[a][b];
        }
    }
}
