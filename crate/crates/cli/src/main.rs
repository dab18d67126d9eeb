//! Command-line interface: verification, curve integration, 4-parameter
//! generation, MUB checks, and figure-data reproduction.
//!
//! Exit codes: 0 on success, 1 on a verification failure, 2 on an
//! integration abort or I/O failure (partial outputs are retained), 64 on
//! usage errors.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use chrono::SecondsFormat;
use clap::{Parser, Subcommand};

use hadamard6::catalog::{self, SeedId};
use hadamard6::continuation::{
    generate_f6, integrate_curve_full, steps_for, straight_line_curve, IntegratorConfig,
    SeedDescriptor, Trajectory, HADAMARD_F_LIMIT,
};
use hadamard6::mub::{self, Basis};
use hadamard6::objective;
use hadamard6::persistence::{
    self, fmt_f64, DirectionSpec, EndStateSummary, RunManifest,
};
use hadamard6::phase_space::{matrix_from_phases, phases_from_matrix, PhaseVector};
use hadamard6::spectral::{eig_hessian, DEFAULT_NULL_TOL};
use hadamard6::{Error, Vector25, DIM};

/// Parameters of the Fig. 2 four-way run.
const FIG2_THETAS: [f64; 4] = [0.23, 0.17, 0.34, 0.26];

const EXIT_OK: u8 = 0;
const EXIT_VERIFY_FAIL: u8 = 1;
const EXIT_RUNTIME: u8 = 2;
const EXIT_USAGE: u8 = 64;

#[derive(Parser)]
#[command(
    name = "hadamard6",
    version,
    about = "Classify and numerically extend order-6 complex Hadamard matrices",
    after_help = "The environment variable HW_NULL_TOL overrides the nullspace threshold \
                  (default 1e-4); SOURCE_DATE_EPOCH pins manifest timestamps for \
                  byte-reproducible output."
)]
struct Cli {
    /// Nullspace eigenvalue threshold (beats HW_NULL_TOL).
    #[arg(long, global = true)]
    null_tol: Option<f64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print f, max |gradient|, and the nullspace dimension of a seed;
    /// exits 0 iff the seed is a Hadamard (f <= 1e-10).
    Verify {
        /// Catalog id (fourier, fourier-family:a,b, fourier-t-family:a,b,
        /// tao) or a .phases.json / .matrix.json file.
        #[arg(long)]
        seed: String,
        /// Optional output prefix for a run manifest.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Integrate a curve of Hadamards from a catalog seed.
    Integrate {
        /// Catalog seed id.
        #[arg(long)]
        seed: String,
        /// Initial direction as coefficients c1,c2,c3,c4 over the frame
        /// directions (the affine-family supports at Fourier).
        #[arg(long)]
        direction: Option<String>,
        /// Raw 25-component direction vector as a JSON array file.
        #[arg(long)]
        direction_file: Option<PathBuf>,
        /// Arc length to integrate.
        #[arg(long)]
        length: f64,
        /// Predictor step length.
        #[arg(long, default_value_t = 0.001)]
        step: f64,
        /// Record every k-th state.
        #[arg(long, default_value_t = 1)]
        record_every: usize,
        /// Output prefix; writes <out>.traj.csv and <out>.manifest.json.
        #[arg(long)]
        out: PathBuf,
    },
    /// Generate the 4-parameter Hadamard F6(theta1..theta4) from Fourier.
    Generate {
        /// Segment lengths theta1,theta2,theta3,theta4.
        #[arg(long)]
        theta: String,
        #[arg(long, default_value_t = 0.001)]
        step: f64,
        /// Output prefix; writes endpoint phases/matrix, the 4-segment
        /// trajectory, and a manifest.
        #[arg(long)]
        out: PathBuf,
    },
    /// Pairwise unbiasedness report; exits 0 iff the bases form a MUB set.
    Mub {
        /// Bases: "standard", a catalog seed id, or a .matrix.json file.
        #[arg(long, num_args = 1.., required = true)]
        bases: Vec<String>,
        /// Unbiasedness tolerance per probability.
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
        /// Orthonormality tolerance for bases loaded from files.
        #[arg(long, default_value_t = 1e-9)]
        basis_tol: f64,
        /// Optional output prefix; writes <out>.mub.json and a manifest.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Reproduce the Fig. 1 data: integrate from Fourier along the
    /// normalized second+third frame direction, with the uncorrected
    /// straight-line comparison curve.
    Fig1 {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0.001)]
        step: f64,
        #[arg(long, default_value_t = 1.0)]
        length: f64,
    },
    /// Reproduce the Fig. 2 data: F6(0.23, 0.17, 0.34, 0.26) with
    /// per-segment trajectories.
    Fig2 {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0.001)]
        step: f64,
    },
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }

    fn runtime(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_RUNTIME,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::InvalidConfig(_) | Error::UnknownSeedId(_) | Error::IndexOutOfRange { .. } => {
                EXIT_USAGE
            }
            _ => EXIT_RUNTIME,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // clap renders --help/--version through the same error path
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn dispatch(cli: Cli) -> Result<u8, Failure> {
    let null_tol = resolve_null_tol(cli.null_tol)?;
    match cli.command {
        Command::Verify { seed, out } => verify(&seed, out.as_deref(), null_tol),
        Command::Integrate {
            seed,
            direction,
            direction_file,
            length,
            step,
            record_every,
            out,
        } => {
            let cfg = IntegratorConfig {
                step_length: step,
                null_tol,
                record_every,
                ..IntegratorConfig::default()
            };
            integrate(
                &seed,
                direction.as_deref(),
                direction_file.as_deref(),
                length,
                &cfg,
                &out,
            )
        }
        Command::Generate { theta, step, out } => {
            let cfg = IntegratorConfig {
                step_length: step,
                null_tol,
                ..IntegratorConfig::default()
            };
            generate(&theta, &cfg, &out)
        }
        Command::Mub {
            bases,
            tol,
            basis_tol,
            out,
        } => mub_command(&bases, tol, basis_tol, out.as_deref(), null_tol),
        Command::Fig1 { out, step, length } => {
            let cfg = IntegratorConfig {
                step_length: step,
                null_tol,
                ..IntegratorConfig::default()
            };
            fig1(length, &cfg, &out)
        }
        Command::Fig2 { out, step } => {
            let cfg = IntegratorConfig {
                step_length: step,
                null_tol,
                ..IntegratorConfig::default()
            };
            fig2(&cfg, &out)
        }
    }
}

/// Threshold precedence: --null-tol flag, then HW_NULL_TOL, then default.
fn resolve_null_tol(flag: Option<f64>) -> Result<f64, Failure> {
    let tol = match flag {
        Some(t) => t,
        None => match std::env::var("HW_NULL_TOL") {
            Ok(raw) => raw
                .parse::<f64>()
                .map_err(|_| Failure::usage(format!("HW_NULL_TOL is not a number: '{raw}'")))?,
            Err(_) => DEFAULT_NULL_TOL,
        },
    };
    if !tol.is_finite() || tol <= 0.0 {
        return Err(Failure::usage(format!(
            "nullspace threshold must be a positive real, got {tol}"
        )));
    }
    Ok(tol)
}

fn timestamp() -> String {
    if let Ok(raw) = std::env::var("SOURCE_DATE_EPOCH") {
        if let Ok(secs) = raw.parse::<i64>() {
            if let Some(dt) = chrono::DateTime::from_timestamp(secs, 0) {
                return dt.to_rfc3339_opts(SecondsFormat::Secs, true);
            }
        }
    }
    chrono::Utc::now().to_rfc3339_opts(SecondsFormat::Secs, true)
}

fn manifest(
    cfg: &IntegratorConfig,
    seed: Option<SeedDescriptor>,
    direction: DirectionSpec,
    summary: EndStateSummary,
) -> RunManifest {
    RunManifest {
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        timestamp: timestamp(),
        config: cfg.clone(),
        seed,
        direction,
        summary,
    }
}

fn trajectory_summary(t: &Trajectory) -> EndStateSummary {
    EndStateSummary {
        final_f: t.final_f(),
        total_theta: t.total_length,
        step_count: t.step_count(),
        // the integrator only accepts states with a 4-dimensional nullspace
        nullspace_dims: vec![4],
    }
}

/// Load a seed for `verify`: a catalog id or a phases/matrix JSON file.
fn load_seed(spec: &str) -> Result<(Option<SeedDescriptor>, PhaseVector), Failure> {
    if let Ok(id) = spec.parse::<SeedId>() {
        let phases = id.phases()?;
        return Ok((Some(SeedDescriptor::Catalog(id)), phases));
    }
    let path = Path::new(spec);
    if !path.exists() {
        return Err(Failure::usage(format!(
            "'{spec}' is neither a catalog seed id nor an existing file"
        )));
    }
    let phases = if spec.ends_with(".matrix.json") {
        let matrix = persistence::read_matrix(path)?;
        phases_from_matrix(&matrix)?
    } else {
        persistence::read_phases(path)?
    };
    Ok((Some(SeedDescriptor::Raw(phases.clone())), phases))
}

fn parse_catalog_seed(spec: &str) -> Result<SeedId, Failure> {
    spec.parse::<SeedId>().map_err(Failure::from)
}

fn verify(seed_spec: &str, out: Option<&Path>, null_tol: f64) -> Result<u8, Failure> {
    let (descriptor, phases) = load_seed(seed_spec)?;
    let f = objective::f(&phases);
    let max_gradient = objective::gradient(&phases).max_abs();
    let spectrum = eig_hessian(&objective::hessian(&phases), null_tol)?;

    println!("seed: {seed_spec}");
    println!("f: {}", fmt_f64(f));
    println!("max_gradient: {}", fmt_f64(max_gradient));
    println!("nullspace_dim: {}", spectrum.null_dim());

    if let Some(prefix) = out {
        let cfg = IntegratorConfig {
            null_tol,
            ..IntegratorConfig::default()
        };
        let summary = EndStateSummary {
            final_f: f,
            total_theta: 0.0,
            step_count: 0,
            nullspace_dims: vec![spectrum.null_dim()],
        };
        let m = manifest(&cfg, descriptor, DirectionSpec::None, summary);
        persistence::write_manifest(&m, with_ext(prefix, "manifest.json"))?;
    }

    Ok(if f <= HADAMARD_F_LIMIT {
        EXIT_OK
    } else {
        EXIT_VERIFY_FAIL
    })
}

fn parse_coefficients(raw: &str) -> Result<[f64; 4], Failure> {
    let parts: Vec<&str> = raw.split(',').collect();
    if parts.len() != 4 {
        return Err(Failure::usage(format!(
            "--direction needs 4 comma-separated coefficients, got {}",
            parts.len()
        )));
    }
    let mut coeffs = [0.0; 4];
    for (slot, part) in coeffs.iter_mut().zip(&parts) {
        *slot = part
            .trim()
            .parse()
            .map_err(|_| Failure::usage(format!("bad direction coefficient '{part}'")))?;
    }
    Ok(coeffs)
}

fn direction_from_coefficients(coeffs: &[f64; 4]) -> Vector25 {
    let dirs = catalog::initial_directions();
    let mut v = [0.0; DIM];
    for (dir, c) in dirs.iter().zip(coeffs) {
        for (slot, x) in v.iter_mut().zip(dir) {
            *slot += c * x;
        }
    }
    v
}

fn read_direction_file(path: &Path) -> Result<Vector25, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::runtime(e.to_string()))?;
    let values: Vec<f64> = serde_json::from_str(&text)
        .map_err(|e| Failure::usage(format!("direction file must be a JSON array of 25 reals: {e}")))?;
    let arr: Vector25 = values.as_slice().try_into().map_err(|_| {
        Failure::usage(format!(
            "direction file must hold exactly {DIM} values, got {}",
            values.len()
        ))
    })?;
    if arr.iter().any(|v| !v.is_finite()) {
        return Err(Failure::usage("direction file holds a non-finite value"));
    }
    Ok(arr)
}

/// Write the trajectory (possibly partial) and its manifest, then return the
/// exit code: 2 when the run aborted, 0 otherwise.
fn finish_curve_run(
    result: Result<Trajectory, Error>,
    cfg: &IntegratorConfig,
    seed: Option<SeedDescriptor>,
    direction: DirectionSpec,
    prefix: &Path,
) -> Result<u8, Failure> {
    match result {
        Ok(trajectory) => {
            persistence::write_trajectory(&trajectory, with_ext(prefix, "traj.csv"))?;
            let m = manifest(cfg, seed, direction, trajectory_summary(&trajectory));
            persistence::write_manifest(&m, with_ext(prefix, "manifest.json"))?;
            Ok(EXIT_OK)
        }
        Err(Error::Aborted {
            partial, source, ..
        }) => {
            persistence::write_trajectory(&partial, with_ext(prefix, "traj.csv"))?;
            let m = manifest(cfg, seed, direction, trajectory_summary(&partial));
            persistence::write_manifest(&m, with_ext(prefix, "manifest.json"))?;
            eprintln!("integration aborted: {source}");
            eprintln!("partial trajectory retained at {}", with_ext(prefix, "traj.csv").display());
            Ok(EXIT_RUNTIME)
        }
        Err(e) => Err(e.into()),
    }
}

fn integrate(
    seed_spec: &str,
    direction: Option<&str>,
    direction_file: Option<&Path>,
    length: f64,
    cfg: &IntegratorConfig,
    prefix: &Path,
) -> Result<u8, Failure> {
    let id = parse_catalog_seed(seed_spec)?;
    let phases = id.phases()?;
    let (raw_direction, spec) = match (direction, direction_file) {
        (Some(coeffs), None) => {
            let c = parse_coefficients(coeffs)?;
            (
                direction_from_coefficients(&c),
                DirectionSpec::FrameCoefficients(c),
            )
        }
        (None, Some(path)) => {
            let v = read_direction_file(path)?;
            (v, DirectionSpec::Raw(Box::new(v)))
        }
        _ => {
            return Err(Failure::usage(
                "give exactly one of --direction or --direction-file",
            ))
        }
    };
    // From the Fourier matrix the canonical frame is the four affine-family
    // directions; elsewhere the nullspace eigenbasis at the seed is used.
    let frame = match id {
        SeedId::Fourier => Some(catalog::initial_directions()),
        _ => None,
    };
    let descriptor = SeedDescriptor::Catalog(id);
    let result = integrate_curve_full(
        descriptor.clone(),
        &phases,
        &raw_direction,
        frame.as_ref(),
        length,
        cfg,
    );
    finish_curve_run(result, cfg, Some(descriptor), spec, prefix)
}

fn parse_thetas(raw: &str) -> Result<[f64; 4], Failure> {
    let parts: Vec<&str> = raw.split(',').collect();
    if parts.len() != 4 {
        return Err(Failure::usage(format!(
            "--theta needs 4 comma-separated lengths, got {}",
            parts.len()
        )));
    }
    let mut thetas = [0.0; 4];
    for (slot, part) in thetas.iter_mut().zip(&parts) {
        *slot = part
            .trim()
            .parse()
            .map_err(|_| Failure::usage(format!("bad theta '{part}'")))?;
    }
    Ok(thetas)
}

fn generate(theta_spec: &str, cfg: &IntegratorConfig, prefix: &Path) -> Result<u8, Failure> {
    let thetas = parse_thetas(theta_spec)?;
    match generate_f6(thetas, cfg) {
        Ok((endpoint, trajectory)) => {
            persistence::write_phases(&endpoint, with_ext(prefix, "phases.json"))?;
            let matrix = matrix_from_phases(&endpoint);
            persistence::write_matrix(matrix.entries(), with_ext(prefix, "matrix.json"))?;
            persistence::write_trajectory(&trajectory, with_ext(prefix, "traj.csv"))?;
            let m = manifest(
                cfg,
                Some(SeedDescriptor::Catalog(SeedId::Fourier)),
                DirectionSpec::Thetas(thetas),
                trajectory_summary(&trajectory),
            );
            persistence::write_manifest(&m, with_ext(prefix, "manifest.json"))?;
            println!("endpoint f: {}", fmt_f64(trajectory.final_f()));
            Ok(EXIT_OK)
        }
        Err(Error::Aborted {
            partial, source, ..
        }) => {
            persistence::write_trajectory(&partial, with_ext(prefix, "traj.csv"))?;
            let m = manifest(
                cfg,
                Some(SeedDescriptor::Catalog(SeedId::Fourier)),
                DirectionSpec::Thetas(thetas),
                trajectory_summary(&partial),
            );
            persistence::write_manifest(&m, with_ext(prefix, "manifest.json"))?;
            eprintln!("generation aborted: {source}");
            Ok(EXIT_RUNTIME)
        }
        Err(e) => Err(e.into()),
    }
}

/// Parse a basis spec: "standard", a catalog seed id, or a matrix file.
fn load_basis(spec: &str, basis_tol: f64) -> Result<Basis, Failure> {
    if spec == "standard" {
        return Ok(Basis::standard());
    }
    if let Ok(id) = spec.parse::<SeedId>() {
        let m = matrix_from_phases(&id.phases()?);
        return Ok(Basis::from_matrix_columns_with_tol(
            id.to_string(),
            m.entries(),
            basis_tol,
        )?);
    }
    let path = Path::new(spec);
    if !path.exists() {
        return Err(Failure::usage(format!(
            "'{spec}' is neither 'standard', a catalog seed id, nor an existing file"
        )));
    }
    let matrix = persistence::read_matrix(path)?;
    let label = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| spec.to_string());
    Ok(Basis::from_matrix_columns_with_tol(
        label, &matrix, basis_tol,
    )?)
}

fn mub_command(
    base_specs: &[String],
    tol: f64,
    basis_tol: f64,
    out: Option<&Path>,
    null_tol: f64,
) -> Result<u8, Failure> {
    let bases: Vec<Basis> = base_specs
        .iter()
        .map(|s| load_basis(s, basis_tol))
        .collect::<Result<_, _>>()?;
    let report = mub::mub_report(&bases, tol)?;
    let json = persistence::to_json_string(&report)?;

    match out {
        Some(prefix) => {
            std::fs::write(with_ext(prefix, "mub.json"), &json)
                .map_err(|e| Failure::runtime(e.to_string()))?;
            let cfg = IntegratorConfig {
                null_tol,
                ..IntegratorConfig::default()
            };
            let worst = report
                .defects
                .iter()
                .enumerate()
                .flat_map(|(i, row)| row.iter().skip(i + 1))
                .fold(0.0f64, |m, d| m.max(*d));
            let summary = EndStateSummary {
                final_f: worst,
                total_theta: 0.0,
                step_count: 0,
                nullspace_dims: vec![],
            };
            let m = manifest(&cfg, None, DirectionSpec::None, summary);
            persistence::write_manifest(&m, with_ext(prefix, "manifest.json"))?;
        }
        None => print!("{json}"),
    }
    println!(
        "unbiased pairs: {} of {}; is MUB set: {}",
        report.unbiased_pairs,
        report.labels.len() * (report.labels.len() - 1) / 2,
        report.is_mub_set
    );
    Ok(if report.is_mub_set {
        EXIT_OK
    } else {
        EXIT_VERIFY_FAIL
    })
}

fn fig1(length: f64, cfg: &IntegratorConfig, prefix: &Path) -> Result<u8, Failure> {
    let dirs = catalog::initial_directions();
    let mut combined = [0.0; DIM];
    for k in 0..DIM {
        combined[k] = dirs[1][k] + dirs[2][k];
    }
    let descriptor = SeedDescriptor::Catalog(SeedId::Fourier);
    let seed = catalog::fourier();

    // the uncorrected comparison needs the unit direction explicitly
    let norm = combined.iter().map(|x| x * x).sum::<f64>().sqrt();
    let mut unit = combined;
    for x in &mut unit {
        *x /= norm;
    }
    let straight = straight_line_curve(descriptor.clone(), &seed, &unit, length, cfg)?;
    persistence::write_trajectory(&straight, with_ext(prefix, "uncorrected.traj.csv"))?;

    let result = integrate_curve_full(
        descriptor.clone(),
        &seed,
        &combined,
        Some(&dirs),
        length,
        cfg,
    );
    finish_curve_run(
        result,
        cfg,
        Some(descriptor),
        DirectionSpec::FrameCoefficients([0.0, 1.0, 1.0, 0.0]),
        prefix,
    )
}

fn fig2(cfg: &IntegratorConfig, prefix: &Path) -> Result<u8, Failure> {
    match generate_f6(FIG2_THETAS, cfg) {
        Ok((endpoint, trajectory)) => {
            persistence::write_trajectory(&trajectory, with_ext(prefix, "traj.csv"))?;
            persistence::write_phases(&endpoint, with_ext(prefix, "phases.json"))?;
            let matrix = matrix_from_phases(&endpoint);
            persistence::write_matrix(matrix.entries(), with_ext(prefix, "matrix.json"))?;

            // per-segment trajectories, split at the cumulative step counts
            let mut boundaries = vec![0usize];
            let mut cumulative = 0;
            for theta in FIG2_THETAS {
                cumulative += steps_for(theta, cfg.step_length);
                boundaries.push(cumulative);
            }
            for seg in 0..4 {
                let lo = boundaries[seg];
                let hi = boundaries[seg + 1];
                let states: Vec<_> = trajectory
                    .states
                    .iter()
                    .filter(|s| s.step_index >= lo && s.step_index <= hi)
                    .cloned()
                    .collect();
                let segment = Trajectory {
                    config: cfg.clone(),
                    seed: trajectory.seed.clone(),
                    states,
                    total_length: (hi - lo) as f64 * cfg.step_length,
                };
                persistence::write_trajectory(
                    &segment,
                    with_ext(prefix, &format!("seg{}.traj.csv", seg + 1)),
                )?;
            }

            let m = manifest(
                cfg,
                Some(SeedDescriptor::Catalog(SeedId::Fourier)),
                DirectionSpec::Thetas(FIG2_THETAS),
                trajectory_summary(&trajectory),
            );
            persistence::write_manifest(&m, with_ext(prefix, "manifest.json"))?;
            println!("endpoint f: {}", fmt_f64(trajectory.final_f()));
            Ok(EXIT_OK)
        }
        Err(Error::Aborted {
            partial, source, ..
        }) => {
            persistence::write_trajectory(&partial, with_ext(prefix, "traj.csv"))?;
            eprintln!("fig2 generation aborted: {source}");
            Ok(EXIT_RUNTIME)
        }
        Err(e) => Err(e.into()),
    }
}

/// `prefix` + `.` + `ext`, preserving any directory part of the prefix.
fn with_ext(prefix: &Path, ext: &str) -> PathBuf {
    let mut name = prefix.as_os_str().to_os_string();
    name.push(".");
    name.push(ext);
    PathBuf::from(name)
}
