//! Bit-stable serialization of matrices, phase vectors, trajectories, and
//! run manifests.
//!
//! All floating-point values are written in decimal scientific notation with
//! 17 significant digits, which uniquely identifies an IEEE-754 double:
//! files are human-diffable and still round-trip every recorded value
//! exactly. Identical inputs always produce byte-identical outputs.
//!
//! File conventions: `.traj.csv` for trajectories, `.matrix.json`,
//! `.phases.json`, and `.manifest.json` for the JSON schemas. Concurrent
//! writes to distinct paths are safe; writing the same path concurrently is
//! undefined.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::fs;
use std::io::{self, Write as _};
use std::path::Path;

use crate::continuation::{IntegratorConfig, SeedDescriptor, StateRecord, Trajectory};
use crate::phase_space::PhaseVector;
use crate::{ComplexMatrix, Error, Result, Vector25, DIM, ORDER};

/// Layout tag stored in phase-vector files.
pub const PHASE_CONVENTION: &str = "cols2-6-major-rows2-6";

/// A double in decimal scientific notation with 17 significant digits.
pub fn fmt_f64(value: f64) -> String {
    format!("{value:.16e}")
}

/// JSON formatter that emits every `f64` via [`fmt_f64`].
struct G17Formatter;

impl serde_json::ser::Formatter for G17Formatter {
    fn write_f64<W>(&mut self, writer: &mut W, value: f64) -> io::Result<()>
    where
        W: ?Sized + io::Write,
    {
        if !value.is_finite() {
            return Err(io::Error::new(
                io::ErrorKind::InvalidData,
                "non-finite float cannot be serialized to JSON",
            ));
        }
        writer.write_all(fmt_f64(value).as_bytes())
    }
}

/// Serialize any value to JSON with 17-significant-digit floats and a
/// trailing newline.
pub fn to_json_string<T: Serialize>(value: &T) -> Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, G17Formatter);
    value
        .serialize(&mut ser)
        .map_err(|e| Error::Schema(e.to_string()))?;
    let mut s = String::from_utf8(buf).expect("serde_json emits valid utf-8");
    s.push('\n');
    Ok(s)
}

/// Write any serializable value as JSON to `path`.
pub fn write_json<T: Serialize>(value: &T, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, to_json_string(value)?)?;
    Ok(())
}

fn parse_json<'a, T: Deserialize<'a>>(text: &'a str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Parse {
        line: e.line(),
        message: e.to_string(),
    })
}

// ---------------------------------------------------------------------------
// matrices: { "n": 6, "re": [[..]], "im": [[..]] }
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct MatrixJson {
    n: usize,
    re: Vec<Vec<f64>>,
    im: Vec<Vec<f64>>,
}

pub fn matrix_to_json(matrix: &ComplexMatrix) -> Result<String> {
    let json = MatrixJson {
        n: ORDER,
        re: matrix
            .iter()
            .map(|row| row.iter().map(|e| e.re).collect())
            .collect(),
        im: matrix
            .iter()
            .map(|row| row.iter().map(|e| e.im).collect())
            .collect(),
    };
    to_json_string(&json)
}

pub fn write_matrix(matrix: &ComplexMatrix, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, matrix_to_json(matrix)?)?;
    Ok(())
}

pub fn matrix_from_json(text: &str) -> Result<ComplexMatrix> {
    let json: MatrixJson = parse_json(text)?;
    if json.n != ORDER {
        return Err(Error::Schema(format!("expected n = {ORDER}, got {}", json.n)));
    }
    for (name, part) in [("re", &json.re), ("im", &json.im)] {
        if part.len() != ORDER || part.iter().any(|row| row.len() != ORDER) {
            return Err(Error::Schema(format!("'{name}' must be a {ORDER}x{ORDER} array")));
        }
        if part.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::Schema(format!("'{name}' holds a non-finite entry")));
        }
    }
    let mut matrix = [[Complex64::ZERO; ORDER]; ORDER];
    for i in 0..ORDER {
        for j in 0..ORDER {
            matrix[i][j] = Complex64::new(json.re[i][j], json.im[i][j]);
        }
    }
    Ok(matrix)
}

pub fn read_matrix(path: impl AsRef<Path>) -> Result<ComplexMatrix> {
    matrix_from_json(&fs::read_to_string(path)?)
}

// ---------------------------------------------------------------------------
// phase vectors: { "convention": "...", "phases": [25 reals] }
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct PhasesJson {
    convention: String,
    phases: PhaseVector,
}

pub fn phases_to_json(phases: &PhaseVector) -> Result<String> {
    to_json_string(&PhasesJson {
        convention: PHASE_CONVENTION.into(),
        phases: phases.clone(),
    })
}

/// Write a phase vector in its canonical `[0, 2π)` form.
pub fn write_phases(phases: &PhaseVector, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, phases_to_json(phases)?)?;
    Ok(())
}

pub fn phases_from_json(text: &str) -> Result<PhaseVector> {
    let json: PhasesJson = parse_json(text)?;
    if json.convention != PHASE_CONVENTION {
        return Err(Error::Schema(format!(
            "unknown phase convention '{}', expected '{PHASE_CONVENTION}'",
            json.convention
        )));
    }
    Ok(json.phases)
}

pub fn read_phases(path: impl AsRef<Path>) -> Result<PhaseVector> {
    phases_from_json(&fs::read_to_string(path)?)
}

// ---------------------------------------------------------------------------
// trajectories: CSV, one row per recorded state
// ---------------------------------------------------------------------------

fn trajectory_header() -> String {
    let mut cols = vec![
        "step_index".to_string(),
        "theta".to_string(),
        "f_value".to_string(),
        "correction_len".to_string(),
    ];
    cols.extend((0..DIM).map(|i| format!("phi_{i:02}")));
    cols.join(",")
}

/// Render a trajectory as CSV. Phases are written as stored (unwrapped), so
/// plotted curves stay continuous and every float round-trips exactly.
pub fn trajectory_to_csv(t: &Trajectory) -> String {
    let mut out = String::with_capacity(64 * (t.states.len() + 1));
    out.push_str(&trajectory_header());
    out.push('\n');
    for s in &t.states {
        out.push_str(&s.step_index.to_string());
        for v in [s.theta, s.f_value, s.correction_len] {
            out.push(',');
            out.push_str(&fmt_f64(v));
        }
        for p in s.phases.as_array() {
            out.push(',');
            out.push_str(&fmt_f64(*p));
        }
        out.push('\n');
    }
    out
}

pub fn write_trajectory(t: &Trajectory, path: impl AsRef<Path>) -> Result<()> {
    let mut file = io::BufWriter::new(fs::File::create(path)?);
    file.write_all(trajectory_to_csv(t).as_bytes())?;
    file.flush()?;
    Ok(())
}

/// Parse a trajectory CSV.
///
/// The CSV carries only the state records; the run configuration and seed
/// identity travel in the run manifest written next to it, so the returned
/// trajectory substitutes the default [`IntegratorConfig`] and describes its
/// seed by the first recorded phases.
pub fn trajectory_from_csv(text: &str) -> Result<Trajectory> {
    let parse_err = |line: usize, message: String| Error::Parse { line, message };
    let mut lines = text.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| parse_err(1, "empty trajectory file".into()))?;
    if header != trajectory_header() {
        return Err(parse_err(1, format!("unexpected header '{header}'")));
    }

    let mut states = Vec::new();
    for (idx, line) in lines {
        let line_no = idx + 1;
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 4 + DIM {
            return Err(parse_err(
                line_no,
                format!("expected {} fields, got {}", 4 + DIM, fields.len()),
            ));
        }
        let step_index: usize = fields[0]
            .parse()
            .map_err(|e| parse_err(line_no, format!("bad step_index '{}': {e}", fields[0])))?;
        let mut float_fields = [0.0; 3 + DIM];
        for (slot, raw) in float_fields.iter_mut().zip(&fields[1..]) {
            *slot = raw
                .parse()
                .map_err(|e| parse_err(line_no, format!("bad float '{raw}': {e}")))?;
        }
        let mut phases = [0.0; DIM];
        phases.copy_from_slice(&float_fields[3..]);
        let phases = PhaseVector::new(phases)
            .map_err(|e| parse_err(line_no, format!("bad phases: {e}")))?;
        states.push(StateRecord {
            step_index,
            theta: float_fields[0],
            f_value: float_fields[1],
            correction_len: float_fields[2],
            phases,
        });
    }
    if states.is_empty() {
        return Err(parse_err(2, "trajectory holds no state rows".into()));
    }
    for pair in states.windows(2) {
        if pair[1].step_index <= pair[0].step_index {
            return Err(parse_err(
                2 + states.iter().position(|s| s == &pair[1]).unwrap_or(0),
                "step_index values must be strictly increasing".into(),
            ));
        }
    }

    let total_length = states.last().map_or(0.0, |s| s.theta);
    let seed = SeedDescriptor::Raw(states[0].phases.clone());
    Ok(Trajectory {
        config: IntegratorConfig::default(),
        seed,
        states,
        total_length,
    })
}

pub fn read_trajectory(path: impl AsRef<Path>) -> Result<Trajectory> {
    trajectory_from_csv(&fs::read_to_string(path)?)
}

// ---------------------------------------------------------------------------
// run manifests
// ---------------------------------------------------------------------------

/// How a run's stepping direction was specified.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum DirectionSpec {
    /// No direction (verification and report runs).
    None,
    /// Coefficients over the initial frame `φ̂_1..φ̂_4`.
    FrameCoefficients([f64; 4]),
    /// A raw 25-component direction vector.
    Raw(Box<Vector25>),
    /// Segment lengths of a 4-parameter generation run.
    Thetas([f64; 4]),
}

/// End-of-run summary stored in the manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EndStateSummary {
    pub final_f: f64,
    pub total_theta: f64,
    pub step_count: usize,
    /// Distinct nullspace dimensions observed during the run.
    pub nullspace_dims: Vec<usize>,
}

/// Everything needed to reproduce a run, written next to its outputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub timestamp: String,
    pub config: IntegratorConfig,
    /// Absent only for runs with no seed (MUB reports).
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub seed: Option<SeedDescriptor>,
    pub direction: DirectionSpec,
    pub summary: EndStateSummary,
}

pub fn write_manifest(manifest: &RunManifest, path: impl AsRef<Path>) -> Result<()> {
    write_json(manifest, path)
}

pub fn read_manifest(path: impl AsRef<Path>) -> Result<RunManifest> {
    parse_json(&fs::read_to_string(path)?)
}
