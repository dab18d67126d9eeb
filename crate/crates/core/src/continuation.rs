//! Predictor–corrector integration of Hadamard curves.
//!
//! A curve of Hadamards is traced by stepping a fixed length `Δθ` along a
//! unit direction in the Hessian nullspace (predictor), removing the
//! second-order drift with Newton corrections confined to the curvature
//! complement, and then transporting the direction — and a frame of four
//! nullspace-spanning directions — into the nullspace at the corrected
//! point. Composing four integrated segments along the evolving frame
//! yields the 4-parameter set `F6(θ1, θ2, θ3, θ4)` seeded at the Fourier
//! matrix.
//!
//! Frame vectors are transported by pure projection, without
//! re-orthonormalization or re-normalization; their linear independence is
//! monitored via [`frame_min_singular`], not enforced.

use serde::{Deserialize, Serialize};

use crate::catalog::{self, SeedId};
use crate::linalg;
use crate::objective;
use crate::phase_space::PhaseVector;
use crate::spectral::{
    self, complement_gradient_norm, eig_hessian, nullspace_projector, NullspaceProjector,
    DEFAULT_NULL_TOL,
};
use crate::{Error, Result, Vector25, DIM};

/// Non-unitarity a curve seed (or a verified Hadamard) may carry.
pub const HADAMARD_F_LIMIT: f64 = 1e-10;

/// Complement-gradient norm at which the Newton corrector has converged.
const CORRECTOR_TOL: f64 = 1e-12;

/// Newton applications per step before the step is rejected.
const MAX_NEWTON_ITERATIONS: usize = 5;

/// Local step halvings tried before an integration aborts.
const MAX_HALVINGS: usize = 4;

/// A transported direction whose nullspace projection shrinks below this
/// fraction of its previous length has left the tangent space.
const DIRECTION_LOSS_RATIO: f64 = 0.1;

/// Integration parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntegratorConfig {
    /// Predictor step length `Δθ` in radians.
    pub step_length: f64,
    /// Nullspace threshold handed to the eigendecomposition.
    pub null_tol: f64,
    /// Largest non-unitarity an accepted state may carry.
    pub max_f: f64,
    /// Largest accepted `correction_len / Δθ` ratio.
    pub max_correction_ratio: f64,
    /// Record every k-th state (the seed and final state are always kept).
    pub record_every: usize,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            step_length: 0.001,
            null_tol: DEFAULT_NULL_TOL,
            max_f: 1e-8,
            max_correction_ratio: 0.01,
            record_every: 1,
        }
    }
}

fn positive_finite(value: f64) -> bool {
    value.is_finite() && value > 0.0
}

impl IntegratorConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, value) in [
            ("step_length", self.step_length),
            ("null_tol", self.null_tol),
            ("max_f", self.max_f),
            ("max_correction_ratio", self.max_correction_ratio),
        ] {
            if !positive_finite(value) {
                return Err(Error::InvalidConfig(format!(
                    "{name} must be a positive real, got {value}"
                )));
            }
        }
        if self.record_every == 0 {
            return Err(Error::InvalidConfig(
                "record_every must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

/// Where a trajectory started: a catalog seed or a raw phase vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SeedDescriptor {
    Catalog(SeedId),
    Raw(PhaseVector),
}

/// The integrator's state after an accepted step.
#[derive(Debug, Clone)]
pub struct CurveState {
    pub phases: PhaseVector,
    /// Unit stepping direction, inside the current nullspace.
    pub direction: Vector25,
    /// Four nullspace-spanning directions transported by pure projection.
    pub frame: [Vector25; 4],
    pub step_index: usize,
    /// Non-unitarity at `phases`.
    pub f_value: f64,
    /// Norm of the total Newton correction applied in the last step.
    pub correction_len: f64,
}

impl CurveState {
    /// Validate a seed and set up the state at step 0.
    ///
    /// The raw direction is projected into the seed's nullspace and
    /// normalized. When no frame is supplied, the four nullspace
    /// eigenvectors at the seed are used; a supplied frame is projected
    /// into the nullspace.
    pub fn initial(
        phases: PhaseVector,
        raw_direction: &Vector25,
        frame: Option<&[Vector25; 4]>,
        cfg: &IntegratorConfig,
    ) -> Result<Self> {
        cfg.validate()?;
        let f_value = objective::f(&phases);
        if f_value > HADAMARD_F_LIMIT {
            return Err(Error::SeedNotHadamard {
                f: f_value,
                limit: HADAMARD_F_LIMIT,
            });
        }
        let spectrum = eig_hessian(&objective::hessian(&phases), cfg.null_tol)?;
        if spectrum.null_dim() != 4 {
            return Err(Error::NullspaceDimension {
                found: spectrum.null_dim(),
                step: 0,
            });
        }
        if !spectrum.has_clean_gap() {
            return Err(Error::IllConditionedGap {
                fifth: spectrum.fifth_smallest_abs(),
                required: 10.0 * cfg.null_tol,
                step: 0,
            });
        }
        let projector = nullspace_projector(&spectrum);
        let direction = transport_direction(raw_direction, &projector)?;
        let frame = match frame {
            Some(given) => {
                let mut projected = *given;
                for v in &mut projected {
                    *v = projector.apply(v);
                }
                projected
            }
            None => spectrum
                .null_basis()
                .try_into()
                .expect("nullspace dimension checked above"),
        };
        Ok(Self {
            phases,
            direction,
            frame,
            step_index: 0,
            f_value,
            correction_len: 0.0,
        })
    }
}

/// A recorded trajectory snapshot; the per-row content of trajectory CSVs.
#[derive(Debug, Clone, PartialEq)]
pub struct StateRecord {
    pub step_index: usize,
    /// Cumulative arc length, `step_index · Δθ`.
    pub theta: f64,
    pub f_value: f64,
    pub correction_len: f64,
    pub phases: PhaseVector,
}

impl StateRecord {
    fn from_state(state: &CurveState, step_length: f64) -> Self {
        Self {
            step_index: state.step_index,
            theta: state.step_index as f64 * step_length,
            f_value: state.f_value,
            correction_len: state.correction_len,
            phases: state.phases.clone(),
        }
    }
}

/// An integrated curve: the run configuration, the seed it started from,
/// and the ordered state records.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub config: IntegratorConfig,
    pub seed: SeedDescriptor,
    pub states: Vec<StateRecord>,
    /// Total arc length, `(number of predictor steps) · Δθ`.
    pub total_length: f64,
}

impl Trajectory {
    /// Phases of the last recorded state.
    pub fn final_phases(&self) -> &PhaseVector {
        &self.states.last().expect("trajectory holds at least the seed").phases
    }

    pub fn final_f(&self) -> f64 {
        self.states.last().expect("trajectory holds at least the seed").f_value
    }

    pub fn step_count(&self) -> usize {
        self.states.last().map_or(0, |s| s.step_index)
    }
}

/// Project the previous step's direction into a new nullspace and normalize.
///
/// Fails with [`Error::DirectionLost`] when the projection retains less than
/// a tenth of the direction's length — the curve's tangent has left the
/// nullspace and continuing would be meaningless.
pub fn transport_direction(prev: &Vector25, projector: &NullspaceProjector) -> Result<Vector25> {
    let projected = projector.apply(prev);
    let norm = linalg::norm(&projected);
    let prev_norm = linalg::norm(prev);
    if norm <= DIRECTION_LOSS_RATIO * prev_norm || norm == 0.0 {
        return Err(Error::DirectionLost {
            projection: norm,
            previous: prev_norm,
            step: 0,
        });
    }
    Ok(linalg::scaled(&projected, 1.0 / norm))
}

/// Number of `Δθ` steps covering `length`, rounding up except when `length`
/// is a whole number of steps to within floating noise.
pub fn steps_for(length: f64, step_length: f64) -> usize {
    if length <= 0.0 {
        return 0;
    }
    let ratio = length / step_length;
    let rounded = ratio.round();
    if (ratio - rounded).abs() < 1e-9 {
        rounded as usize
    } else {
        ratio.ceil() as usize
    }
}

/// Outcome of the Newton corrector at a predicted point.
struct Corrected {
    phases: PhaseVector,
    correction_len: f64,
    f_value: f64,
    spectrum: spectral::HessianSpectrum,
}

/// Apply Newton corrections until the complement gradient norm falls below
/// [`CORRECTOR_TOL`], recomputing gradient, Hessian, and spectrum at each
/// iterate. The returned spectrum belongs to the corrected point.
fn correct(mut phases: PhaseVector, cfg: &IntegratorConfig, step_index: usize) -> Result<Corrected> {
    let mut total = [0.0; DIM];
    let mut applied = 0;
    loop {
        let ev = objective::evaluate(&phases);
        let spectrum = eig_hessian(&ev.hessian, cfg.null_tol)?;
        let residual = complement_gradient_norm(&ev.gradient, &spectrum);
        if residual <= CORRECTOR_TOL {
            return Ok(Corrected {
                phases,
                correction_len: linalg::norm(&total),
                f_value: ev.f,
                spectrum,
            });
        }
        if applied == MAX_NEWTON_ITERATIONS {
            return Err(Error::NewtonStalled {
                residual,
                iterations: applied,
                step: step_index,
            });
        }
        let nc = spectral::newton_correction(&ev.gradient, &spectrum);
        phases = phases.offset_by(&nc.delta, 1.0);
        linalg::add_scaled(&mut total, &nc.delta, 1.0);
        applied += 1;
    }
}

/// Mutable working copy advanced by (sub-)steps.
struct WorkState {
    phases: PhaseVector,
    direction: Vector25,
    frame: [Vector25; 4],
}

enum StepOutcome {
    Accepted { f_value: f64, correction_len: f64 },
    Rejected(String),
}

/// One predictor–corrector attempt of length `dtheta`. Mutates `work` only
/// on acceptance. Nullspace-dimension changes, unclean eigenvalue gaps, and
/// lost directions are hard errors; an oversized correction, excessive
/// non-unitarity, or a stalled corrector yields a rejection the caller may
/// retry at half the step length.
fn attempt(
    work: &mut WorkState,
    dtheta: f64,
    cfg: &IntegratorConfig,
    step_index: usize,
) -> Result<StepOutcome> {
    let predicted = work.phases.offset_by(&work.direction, dtheta);
    let corrected = match correct(predicted, cfg, step_index) {
        Ok(c) => c,
        Err(Error::NewtonStalled {
            residual,
            iterations,
            ..
        }) => {
            return Ok(StepOutcome::Rejected(format!(
                "Newton corrector stalled at residual {residual:.3e} after {iterations} iterations"
            )))
        }
        Err(e) => return Err(e),
    };

    if corrected.spectrum.null_dim() != 4 {
        return Err(Error::NullspaceDimension {
            found: corrected.spectrum.null_dim(),
            step: step_index,
        });
    }
    if !corrected.spectrum.has_clean_gap() {
        return Err(Error::IllConditionedGap {
            fifth: corrected.spectrum.fifth_smallest_abs(),
            required: 10.0 * cfg.null_tol,
            step: step_index,
        });
    }
    if corrected.f_value > cfg.max_f {
        return Ok(StepOutcome::Rejected(format!(
            "non-unitarity {:.3e} exceeds max_f {:.1e}",
            corrected.f_value, cfg.max_f
        )));
    }
    let correction_limit = cfg.max_correction_ratio * dtheta;
    if corrected.correction_len > correction_limit {
        return Ok(StepOutcome::Rejected(format!(
            "correction length {:.3e} exceeds {:.3e} ({} of the step length)",
            corrected.correction_len, correction_limit, cfg.max_correction_ratio
        )));
    }

    let projector = nullspace_projector(&corrected.spectrum);
    let direction = transport_direction(&work.direction, &projector).map_err(|e| match e {
        Error::DirectionLost {
            projection,
            previous,
            ..
        } => Error::DirectionLost {
            projection,
            previous,
            step: step_index,
        },
        other => other,
    })?;
    for v in &mut work.frame {
        *v = projector.apply(v);
    }
    work.phases = corrected.phases;
    work.direction = direction;
    Ok(StepOutcome::Accepted {
        f_value: corrected.f_value,
        correction_len: corrected.correction_len,
    })
}

/// Advance `work` by a total arc length `dtheta`, recursively halving the
/// sub-step on rejection, up to [`MAX_HALVINGS`] levels deep. Returns the
/// final non-unitarity and the summed correction length.
fn advance(
    work: &mut WorkState,
    dtheta: f64,
    halvings_left: usize,
    cfg: &IntegratorConfig,
    step_index: usize,
) -> Result<(f64, f64)> {
    match attempt(work, dtheta, cfg, step_index)? {
        StepOutcome::Accepted {
            f_value,
            correction_len,
        } => Ok((f_value, correction_len)),
        StepOutcome::Rejected(reason) => {
            if halvings_left == 0 {
                return Err(Error::StepRejected {
                    step: step_index,
                    halvings: MAX_HALVINGS,
                    reason,
                });
            }
            let (_, first) = advance(work, dtheta / 2.0, halvings_left - 1, cfg, step_index)?;
            let (f_value, second) =
                advance(work, dtheta / 2.0, halvings_left - 1, cfg, step_index)?;
            Ok((f_value, first + second))
        }
    }
}

/// One accepted predictor–corrector step of length `cfg.step_length`.
///
/// In order: the phases move `Δθ` along the state's unit direction; Newton
/// corrections restore the valley floor; the Hessian and nullspace are
/// recomputed at the corrected point; the direction and all four frame
/// vectors are transported there. The step is accepted only when the final
/// non-unitarity stays within `max_f` and the total correction within
/// `max_correction_ratio · Δθ`; otherwise it is retried at half the length.
pub fn step(state: &CurveState, cfg: &IntegratorConfig) -> Result<CurveState> {
    cfg.validate()?;
    debug_assert!((linalg::norm(&state.direction) - 1.0).abs() <= 1e-12);
    let step_index = state.step_index + 1;
    let mut work = WorkState {
        phases: state.phases.clone(),
        direction: state.direction,
        frame: state.frame,
    };
    let (f_value, correction_len) =
        advance(&mut work, cfg.step_length, MAX_HALVINGS, cfg, step_index)?;
    Ok(CurveState {
        phases: work.phases,
        direction: work.direction,
        frame: work.frame,
        step_index,
        f_value,
        correction_len,
    })
}

fn record_due(step_index: usize, final_index: usize, every: usize) -> bool {
    step_index.is_multiple_of(every) || step_index == final_index
}

/// Integrate a curve from a seed Hadamard, defaulting the frame to the four
/// nullspace eigenvectors at the seed. See [`integrate_curve_full`].
pub fn integrate_curve(
    seed: &PhaseVector,
    initial_direction: &Vector25,
    length: f64,
    cfg: &IntegratorConfig,
) -> Result<Trajectory> {
    integrate_curve_full(
        SeedDescriptor::Raw(seed.clone()),
        seed,
        initial_direction,
        None,
        length,
        cfg,
    )
}

/// Integrate a curve of `⌈length/Δθ⌉` accepted steps from a seed Hadamard.
///
/// The initial direction is projected into the seed's nullspace and
/// normalized; it must retain a nonzero projection. On an abort the partial
/// trajectory is returned inside [`Error::Aborted`].
pub fn integrate_curve_full(
    descriptor: SeedDescriptor,
    seed: &PhaseVector,
    initial_direction: &Vector25,
    initial_frame: Option<&[Vector25; 4]>,
    length: f64,
    cfg: &IntegratorConfig,
) -> Result<Trajectory> {
    cfg.validate()?;
    if length.is_nan() || length < 0.0 {
        return Err(Error::InvalidConfig(format!(
            "curve length must be nonnegative, got {length}"
        )));
    }
    let mut state = CurveState::initial(seed.clone(), initial_direction, initial_frame, cfg)?;
    let n_steps = steps_for(length, cfg.step_length);
    let mut states = Vec::with_capacity(n_steps / cfg.record_every + 2);
    states.push(StateRecord::from_state(&state, cfg.step_length));

    for _ in 0..n_steps {
        match step(&state, cfg) {
            Ok(next) => {
                state = next;
                if record_due(state.step_index, n_steps, cfg.record_every) {
                    states.push(StateRecord::from_state(&state, cfg.step_length));
                }
            }
            Err(e) => {
                let completed = state.step_index;
                let partial = Trajectory {
                    config: cfg.clone(),
                    seed: descriptor,
                    states,
                    total_length: completed as f64 * cfg.step_length,
                };
                return Err(Error::Aborted {
                    partial: Box::new(partial),
                    completed,
                    source: Box::new(e),
                });
            }
        }
    }

    Ok(Trajectory {
        config: cfg.clone(),
        seed: descriptor,
        states,
        total_length: n_steps as f64 * cfg.step_length,
    })
}

/// Integrate the 4-parameter Hadamard `F6(θ1, θ2, θ3, θ4)`.
///
/// Starts at the Fourier matrix with the frame `φ̂_1..φ̂_4`, then integrates
/// a distance `θ_i` along the i-th evolving frame vector, in order of
/// increasing i, with the frame transported through all four segments.
/// Returns the endpoint phases and the joined 4-segment trajectory.
pub fn generate_f6(
    thetas: [f64; 4],
    cfg: &IntegratorConfig,
) -> Result<(PhaseVector, Trajectory)> {
    cfg.validate()?;
    for (i, &theta) in thetas.iter().enumerate() {
        if !theta.is_finite() || theta < 0.0 {
            return Err(Error::InvalidConfig(format!(
                "theta{} must be nonnegative, got {theta}",
                i + 1
            )));
        }
    }
    let seed = catalog::fourier();
    let frame = catalog::initial_directions();
    let mut state = CurveState::initial(seed, &frame[0], Some(&frame), cfg)?;
    let descriptor = SeedDescriptor::Catalog(SeedId::Fourier);

    let segment_steps: Vec<usize> = thetas
        .iter()
        .map(|t| steps_for(*t, cfg.step_length))
        .collect();
    let n_total: usize = segment_steps.iter().sum();

    let mut states = Vec::with_capacity(n_total / cfg.record_every + 2);
    states.push(StateRecord::from_state(&state, cfg.step_length));

    let abort = |states: Vec<StateRecord>, state: &CurveState, cfg: &IntegratorConfig, e: Error| {
        let completed = state.step_index;
        Error::Aborted {
            partial: Box::new(Trajectory {
                config: cfg.clone(),
                seed: SeedDescriptor::Catalog(SeedId::Fourier),
                states,
                total_length: completed as f64 * cfg.step_length,
            }),
            completed,
            source: Box::new(e),
        }
    };

    for (segment, &n_steps) in segment_steps.iter().enumerate() {
        if n_steps == 0 {
            continue;
        }
        // Aim along the segment's evolving frame vector at the current point.
        let aim = || -> Result<Vector25> {
            let spectrum = eig_hessian(&objective::hessian(&state.phases), cfg.null_tol)?;
            let projector = nullspace_projector(&spectrum);
            transport_direction(&state.frame[segment], &projector)
        };
        match aim() {
            Ok(direction) => state.direction = direction,
            Err(e) => return Err(abort(states, &state, cfg, e)),
        }
        for _ in 0..n_steps {
            match step(&state, cfg) {
                Ok(next) => {
                    state = next;
                    if record_due(state.step_index, n_total, cfg.record_every) {
                        states.push(StateRecord::from_state(&state, cfg.step_length));
                    }
                }
                Err(e) => return Err(abort(states, &state, cfg, e)),
            }
        }
    }

    let trajectory = Trajectory {
        config: cfg.clone(),
        seed: descriptor,
        states,
        total_length: n_total as f64 * cfg.step_length,
    };
    Ok((state.phases, trajectory))
}

/// Sample the non-unitarity along the *uncorrected* straight line
/// `φ(θ) = seed + θ · direction` on the same `Δθ` grid an integrated curve
/// would use. The comparison curve for the corrected integration.
pub fn straight_line_curve(
    descriptor: SeedDescriptor,
    seed: &PhaseVector,
    unit_direction: &Vector25,
    length: f64,
    cfg: &IntegratorConfig,
) -> Result<Trajectory> {
    cfg.validate()?;
    let n_steps = steps_for(length, cfg.step_length);
    let mut states = Vec::with_capacity(n_steps + 1);
    for k in 0..=n_steps {
        if !record_due(k, n_steps, cfg.record_every) {
            continue;
        }
        let theta = k as f64 * cfg.step_length;
        let phases = seed.offset_by(unit_direction, theta);
        states.push(StateRecord {
            step_index: k,
            theta,
            f_value: objective::f(&phases),
            correction_len: 0.0,
            phases,
        });
    }
    Ok(Trajectory {
        config: cfg.clone(),
        seed: descriptor,
        states,
        total_length: n_steps as f64 * cfg.step_length,
    })
}

/// Smallest singular value of the 25×4 matrix of frame vectors; the
/// monitored measure of frame linear independence.
pub fn frame_min_singular(frame: &[Vector25; 4]) -> f64 {
    let mut gram = [[0.0; 4]; 4];
    for (i, a) in frame.iter().enumerate() {
        for (j, b) in frame.iter().enumerate() {
            gram[i][j] = linalg::dot(a, b);
        }
    }
    let (values, _) = spectral::jacobi_eigen(gram).expect("4x4 Jacobi always converges");
    let min = values.iter().fold(f64::INFINITY, |m, v| m.min(*v));
    min.max(0.0).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::initial_directions;

    fn unit_combination(coeffs: [f64; 4]) -> Vector25 {
        let dirs = initial_directions();
        let mut v = [0.0; DIM];
        for (dir, c) in dirs.iter().zip(coeffs) {
            linalg::add_scaled(&mut v, dir, c);
        }
        linalg::scaled(&v, 1.0 / linalg::norm(&v))
    }

    fn fourier_projector(cfg: &IntegratorConfig) -> NullspaceProjector {
        let spectrum =
            eig_hessian(&objective::hessian(&catalog::fourier()), cfg.null_tol).unwrap();
        nullspace_projector(&spectrum)
    }

    #[test]
    fn transport_keeps_nullspace_directions() {
        let cfg = IntegratorConfig::default();
        let p = fourier_projector(&cfg);
        let dirs = initial_directions();
        let out = transport_direction(&dirs[0], &p).unwrap();
        for (a, b) in out.iter().zip(&dirs[0]) {
            assert!((a - b).abs() < 1e-12);
        }
        let combined = unit_combination([0.0, 1.0, 1.0, 0.0]);
        let out = transport_direction(&combined, &p).unwrap();
        for (a, b) in out.iter().zip(&combined) {
            assert!((a - b).abs() < 1e-6);
        }
    }

    #[test]
    fn transport_rejects_orthogonal_directions() {
        let cfg = IntegratorConfig::default();
        let spectrum =
            eig_hessian(&objective::hessian(&catalog::fourier()), cfg.null_tol).unwrap();
        let p = nullspace_projector(&spectrum);
        // a curvature eigenvector is orthogonal to the nullspace
        let stiff = *spectrum.eigenvector(DIM - 1);
        assert!(matches!(
            transport_direction(&stiff, &p),
            Err(Error::DirectionLost { .. })
        ));
    }

    #[test]
    fn config_validation() {
        let bad_configs = [
            IntegratorConfig {
                step_length: 0.0,
                ..IntegratorConfig::default()
            },
            IntegratorConfig {
                record_every: 0,
                ..IntegratorConfig::default()
            },
            IntegratorConfig {
                max_f: -1.0,
                ..IntegratorConfig::default()
            },
            IntegratorConfig {
                null_tol: f64::NAN,
                ..IntegratorConfig::default()
            },
        ];
        for cfg in &bad_configs {
            assert!(matches!(cfg.validate(), Err(Error::InvalidConfig(_))));
        }
        let state = CurveState::initial(
            catalog::fourier(),
            &initial_directions()[0],
            None,
            &IntegratorConfig::default(),
        )
        .unwrap();
        let zero_step = IntegratorConfig {
            step_length: 0.0,
            ..IntegratorConfig::default()
        };
        assert!(matches!(
            step(&state, &zero_step),
            Err(Error::InvalidConfig(_))
        ));
    }

    #[test]
    fn one_step_along_family_direction() {
        let cfg = IntegratorConfig::default();
        let dirs = initial_directions();
        let state = CurveState::initial(catalog::fourier(), &dirs[0], Some(&dirs), &cfg).unwrap();
        let next = step(&state, &cfg).unwrap();
        assert_eq!(next.step_index, 1);
        assert!(next.f_value <= 1e-10, "f = {}", next.f_value);
        assert!(next.correction_len <= 1e-5);
        assert!((linalg::norm(&next.direction) - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn one_step_increments_take_three_magnitudes() {
        // Stepping along (φ̂_2+φ̂_3)/|φ̂_2+φ̂_3| moves 14 phases not at all,
        // 10 by Δθ/√14, and the one shared support coordinate by 2Δθ/√14.
        let cfg = IntegratorConfig::default();
        let dir = unit_combination([0.0, 1.0, 1.0, 0.0]);
        let state = CurveState::initial(catalog::fourier(), &dir, None, &cfg).unwrap();
        let next = step(&state, &cfg).unwrap();
        let a = cfg.step_length / 14.0_f64.sqrt();
        let mut counts = [0usize; 3];
        for (after, before) in next
            .phases
            .as_array()
            .iter()
            .zip(state.phases.as_array())
        {
            let inc = (after - before).abs();
            let cluster = [0.0, a, 2.0 * a]
                .iter()
                .enumerate()
                .min_by(|(_, x), (_, y)| {
                    (inc - **x).abs().partial_cmp(&(inc - **y).abs()).unwrap()
                })
                .map(|(i, _)| i)
                .unwrap();
            let residual = (inc - [0.0, a, 2.0 * a][cluster]).abs();
            assert!(residual < 1e-7, "increment {inc} off the {{0,a,2a}} grid");
            counts[cluster] += 1;
        }
        assert_eq!(counts, [14, 10, 1]);
    }

    #[test]
    fn zero_length_curve_is_the_seed() {
        let cfg = IntegratorConfig::default();
        let t = integrate_curve(&catalog::fourier(), &initial_directions()[0], 0.0, &cfg).unwrap();
        assert_eq!(t.states.len(), 1);
        assert_eq!(t.total_length, 0.0);
        assert_eq!(t.step_count(), 0);
    }

    #[test]
    fn family_curve_stays_on_the_family() {
        // Along φ̂_1 the curve must trace the first Fourier family: the
        // increments live exactly on the φ1 support and the endpoint fits
        // fourier_family(φ1*, 0) to 1e-6 per phase.
        let cfg = IntegratorConfig::default();
        let dirs = initial_directions();
        let length = 0.1;
        let t = integrate_curve(&catalog::fourier(), &dirs[0], length, &cfg).unwrap();
        assert_eq!(t.step_count(), 100);
        for s in &t.states {
            assert!(s.f_value <= cfg.max_f);
            assert!(s.correction_len <= cfg.max_correction_ratio * cfg.step_length);
        }
        let base = catalog::fourier();
        let end = t.final_phases();
        let support: Vec<usize> = dirs[0]
            .iter()
            .enumerate()
            .filter(|(_, v)| **v != 0.0)
            .map(|(i, _)| i)
            .collect();
        let mut on_support_shift = f64::NEG_INFINITY;
        for k in 0..DIM {
            let shift = end.as_array()[k] - base.as_array()[k];
            if support.contains(&k) {
                on_support_shift = on_support_shift.max(shift.abs());
            } else {
                assert!(shift.abs() <= 1e-8, "off-support phase {k} moved by {shift}");
            }
        }
        assert!(on_support_shift > 1e-3);

        // least-squares fit of the family parameter = mean shift on support
        let phi1: f64 = support
            .iter()
            .map(|&k| end.as_array()[k] - base.as_array()[k])
            .sum::<f64>()
            / support.len() as f64;
        let fit = catalog::fourier_family(phi1, 0.0);
        for (a, b) in end.as_array().iter().zip(fit.as_array()) {
            assert!((a - b).abs() <= 1e-6, "{a} vs {b}");
        }
        // arc-length bookkeeping
        assert!((t.total_length - t.step_count() as f64 * cfg.step_length).abs() <= 1e-12);
    }

    #[test]
    fn generate_f6_zero_is_fourier() {
        let cfg = IntegratorConfig::default();
        let (end, t) = generate_f6([0.0; 4], &cfg).unwrap();
        assert_eq!(end, catalog::fourier());
        assert_eq!(t.states.len(), 1);
        assert_eq!(t.total_length, 0.0);
    }

    #[test]
    fn generate_f6_two_parameters_stays_in_family() {
        let cfg = IntegratorConfig::default();
        let (end, t) = generate_f6([0.05, 0.03, 0.0, 0.0], &cfg).unwrap();
        assert_eq!(t.step_count(), 80);
        let base = catalog::fourier();
        let dirs = initial_directions();
        let mut params = [0.0; 2];
        for (slot, dir) in params.iter_mut().zip(&dirs[..2]) {
            let support: Vec<usize> = dir
                .iter()
                .enumerate()
                .filter(|(_, v)| **v != 0.0)
                .map(|(i, _)| i)
                .collect();
            *slot = support
                .iter()
                .map(|&k| end.as_array()[k] - base.as_array()[k])
                .sum::<f64>()
                / support.len() as f64;
        }
        let fit = catalog::fourier_family(params[0], params[1]);
        for (a, b) in end.as_array().iter().zip(fit.as_array()) {
            assert!((a - b).abs() <= 1e-6);
        }
    }

    #[test]
    fn generate_f6_rejects_negative_theta() {
        let cfg = IntegratorConfig::default();
        assert!(matches!(
            generate_f6([0.1, -0.1, 0.0, 0.0], &cfg),
            Err(Error::InvalidConfig(_))
        ));
    }

    #[test]
    fn rejected_steps_abort_with_partial_trajectory() {
        // A huge step with a sub-femto correction budget is rejected at
        // every halving level.
        let cfg = IntegratorConfig {
            step_length: 0.1,
            max_correction_ratio: 1e-12,
            ..IntegratorConfig::default()
        };
        let err = integrate_curve(
            &catalog::fourier(),
            &unit_combination([0.0, 1.0, 1.0, 0.0]),
            0.3,
            &cfg,
        )
        .unwrap_err();
        match err {
            Error::Aborted {
                partial, completed, source, ..
            } => {
                assert_eq!(completed, 0);
                assert_eq!(partial.states.len(), 1);
                assert!(matches!(*source, Error::StepRejected { .. }));
            }
            other => panic!("expected abort, got {other:?}"),
        }
    }

    #[test]
    fn integration_from_tao_fails_the_dimension_check() {
        let cfg = IntegratorConfig::default();
        let err = integrate_curve(
            &catalog::tao().unwrap(),
            &initial_directions()[0],
            0.01,
            &cfg,
        )
        .unwrap_err();
        assert!(matches!(err, Error::NullspaceDimension { found: 0, .. }));
    }

    #[test]
    fn initial_frame_singular_value() {
        // Gram of φ̂_1..φ̂_4 has eigenvalues {4/3, 1, 1, 2/3}.
        let s = frame_min_singular(&initial_directions());
        assert!((s - (2.0_f64 / 3.0).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn steps_for_rounding() {
        assert_eq!(steps_for(0.0, 0.001), 0);
        assert_eq!(steps_for(1.0, 0.001), 1000);
        assert_eq!(steps_for(0.23, 0.001), 230);
        assert_eq!(steps_for(0.0005, 0.001), 1);
        assert_eq!(steps_for(0.0015, 0.001), 2);
    }

    #[test]
    fn straight_line_f_grows() {
        let cfg = IntegratorConfig::default();
        let dir = unit_combination([0.0, 1.0, 1.0, 0.0]);
        let t = straight_line_curve(
            SeedDescriptor::Catalog(SeedId::Fourier),
            &catalog::fourier(),
            &dir,
            1.0,
            &cfg,
        )
        .unwrap();
        assert_eq!(t.states.len(), 1001);
        let max_f = t.states.iter().fold(0.0f64, |m, s| m.max(s.f_value));
        assert!(max_f > 1e-3, "uncorrected drift only reached {max_f}");
    }

    #[test]
    fn seed_must_be_hadamard() {
        let cfg = IntegratorConfig::default();
        let mut phases = [0.0; DIM];
        phases[0] = 0.5;
        let bad = PhaseVector::new(phases).unwrap();
        assert!(matches!(
            CurveState::initial(bad, &initial_directions()[0], None, &cfg),
            Err(Error::SeedNotHadamard { .. })
        ));
    }
}
