use std::f64::consts::PI;

use num_complex::Complex64;

use super::{ExperimentError, ExperimentParams, Method, SourcePair};
use crate::fock::{coincidence_click_probability, Ensemble, StateVector, ThresholdDetector};

// Four internal modes: two spatial ports, each split into the component
// matched to the single photon's spectral mode and the orthogonal one.
// Before the beamsplitter the ports are the inputs a and b, afterwards the
// outputs x and y.
const A_MATCHED: usize = 0;
const A_ORTHOGONAL: usize = 1;
const B_MATCHED: usize = 2;
const B_ORTHOGONAL: usize = 3;
const NUM_MODES: usize = 4;
const DETECTOR_X: [usize; 2] = [A_MATCHED, A_ORTHOGONAL];
const DETECTOR_Y: [usize; 2] = [B_MATCHED, B_ORTHOGONAL];

/// Phase samples for the classical reference. The coincidence probability
/// is a trigonometric polynomial in the relative phase of degree at most
/// the cutoff, so a uniform grid finer than twice the cutoff is exact; the
/// doubled grid confirms it.
pub const PHASE_GRID_POINTS: usize = 64;
const MAX_PHASE_GRID_POINTS: usize = 1024;

fn detector(params: &ExperimentParams) -> Result<ThresholdDetector, ExperimentError> {
    Ok(ThresholdDetector::new(params.dark_prob)?)
}

fn vacuum(params: &ExperimentParams) -> Result<StateVector, ExperimentError> {
    Ok(StateVector::vacuum(NUM_MODES, params.cutoff)?)
}

fn real(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// Splits whatever occupies input b into the matched and orthogonal
/// internal modes with amplitudes `sqrt(v)` and `sqrt(1 - v)`.
fn route_overlap(state: &StateVector, v: f64) -> Result<StateVector, crate::fock::FockError> {
    state.apply_beamsplitter(B_ORTHOGONAL, B_MATCHED, v)
}

/// The interfering beamsplitter, applied to each internal-mode pair.
fn interfere(state: &StateVector) -> Result<StateVector, crate::fock::FockError> {
    state
        .apply_beamsplitter_50_50(A_MATCHED, B_MATCHED)?
        .apply_beamsplitter_50_50(A_ORTHOGONAL, B_ORTHOGONAL)
}

fn detect(ensemble: &Ensemble, det: &ThresholdDetector) -> Result<f64, ExperimentError> {
    let out = ensemble.map(interfere)?;
    Ok(coincidence_click_probability(
        &out,
        &DETECTOR_X,
        &DETECTOR_Y,
        det,
    )?)
}

/// Source state before any loss.
fn source_state(params: &ExperimentParams) -> Result<StateVector, ExperimentError> {
    let alpha = real(params.mean_photon_number.sqrt());
    let s = vacuum(params)?;
    let s = match params.source_pair {
        SourcePair::SingleVsCoherent => s
            .apply_displacement(B_MATCHED, alpha)?
            .apply_create(A_MATCHED)?,
        SourcePair::SingleVsSingle => s.apply_create(A_MATCHED)?.apply_create(B_MATCHED)?,
        SourcePair::CoherentVsCoherentPhaseAveraged => s
            .apply_displacement(A_MATCHED, alpha)?
            .apply_displacement(B_MATCHED, alpha)?,
    };
    Ok(s)
}

/// Source, loss on every mode, then routing of input b by overlap `v`.
fn prepared_ensemble(params: &ExperimentParams, v: f64) -> Result<Ensemble, ExperimentError> {
    let lossy = Ensemble::pure(source_state(params)?)?.apply_loss_to(
        &[A_MATCHED, A_ORTHOGONAL, B_MATCHED, B_ORTHOGONAL],
        params.transmittance,
    )?;
    Ok(lossy.map(|s| route_overlap(s, v))?)
}

fn phase_averaged(prepared: &Ensemble, det: &ThresholdDetector) -> Result<f64, ExperimentError> {
    let at_phase = |phi: f64| -> Result<f64, ExperimentError> {
        let shifted = prepared.map(|s| {
            s.apply_phase_shift(B_MATCHED, phi)?
                .apply_phase_shift(B_ORTHOGONAL, phi)
        })?;
        detect(&shifted, det)
    };
    let mut points = PHASE_GRID_POINTS;
    let mut sum = (0..points).try_fold(0.0, |acc, k| {
        Ok::<_, ExperimentError>(acc + at_phase(2.0 * PI * k as f64 / points as f64)?)
    })?;
    loop {
        let coarse = sum / points as f64;
        // Midpoints of the current grid complete the doubled grid.
        sum += (0..points).try_fold(0.0, |acc, k| {
            Ok::<_, ExperimentError>(acc + at_phase(2.0 * PI * (k as f64 + 0.5) / points as f64)?)
        })?;
        points *= 2;
        let fine = sum / points as f64;
        if (fine - coarse).abs() <= 1e-13 + 1e-9 * fine.abs() {
            return Ok(fine);
        }
        if points >= MAX_PHASE_GRID_POINTS {
            return Err(ExperimentError::PhaseAverage {
                coarse,
                fine,
                points,
            });
        }
    }
}

/// Exact coincidence probability for a given mode overlap `v`, bypassing
/// the delay-to-overlap mapping.
pub fn coincidence_exact_at_overlap(
    params: &ExperimentParams,
    v: f64,
) -> Result<f64, ExperimentError> {
    params.validate()?;
    if !(0.0..=1.0).contains(&v) {
        return Err(ExperimentError::Parameter {
            name: "overlap",
            value: v,
            range: "[0, 1]",
        });
    }
    let det = detector(params)?;
    let prepared = prepared_ensemble(params, v)?;
    match params.source_pair {
        SourcePair::CoherentVsCoherentPhaseAveraged => phase_averaged(&prepared, &det),
        _ => detect(&prepared, &det),
    }
}

/// Exact twofold coincidence probability at relative delay `delay`
/// seconds: the source state, loss `T` on every mode, overlap `V(delay)`,
/// the 50:50 beamsplitter and two threshold detectors with dark
/// probability `d`, all evaluated in the truncated Fock space.
pub fn coincidence_exact(params: &ExperimentParams, delay: f64) -> Result<f64, ExperimentError> {
    coincidence_exact_at_overlap(params, params.overlap.at(delay))
}

/// The two loss branches of the single-photon-plus-coherent input,
/// evaluated separately: `P_T` with the photon surviving and `P_R` with it
/// lost, coherent amplitude `sqrt(T) alpha` in both.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BranchCoincidences {
    pub survived: f64,
    pub lost: f64,
    /// `T P_T + (1 - T) P_R`.
    pub mixture: f64,
}

pub fn branch_coincidences(
    params: &ExperimentParams,
    v: f64,
) -> Result<BranchCoincidences, ExperimentError> {
    params.validate()?;
    if params.source_pair != SourcePair::SingleVsCoherent {
        return Err(ExperimentError::WrongSourcePair {
            expected: SourcePair::SingleVsCoherent,
            actual: params.source_pair,
        });
    }
    let t = params.transmittance;
    let det = detector(params)?;
    let beta = real((t * params.mean_photon_number).sqrt());
    let lost_state = vacuum(params)?.apply_displacement(B_MATCHED, beta)?;
    let survived_state = lost_state.apply_create(A_MATCHED)?;
    let eval = |s: StateVector| -> Result<f64, ExperimentError> {
        let e = Ensemble::pure(route_overlap(&s, v)?)?;
        detect(&e, &det)
    };
    let survived = eval(survived_state)?;
    let lost = eval(lost_state)?;
    Ok(BranchCoincidences {
        survived,
        lost,
        mixture: t * survived + (1.0 - t) * lost,
    })
}

/// The small-`T`, small-`d` approximation, up to an overall constant:
///
/// ```text
/// 1 - V(tau) / [ (1 + 2d / (T |alpha|^2)) (1 + d/T + |alpha|^2 / 2) ]
/// ```
///
/// The first factor is the penalty from the vacuum component of the
/// coherent pulse, the second from its multi-photon components. The value
/// at `V = 0` is 1, so the result is directly the ratio `P(tau) / P(inf)`.
pub fn coincidence_closed_form(
    params: &ExperimentParams,
    delay: f64,
) -> Result<f64, ExperimentError> {
    closed_form_at_overlap(params, params.overlap.at(delay))
}

pub(super) fn closed_form_at_overlap(
    params: &ExperimentParams,
    v: f64,
) -> Result<f64, ExperimentError> {
    params.validate()?;
    if params.source_pair != SourcePair::SingleVsCoherent {
        return Err(ExperimentError::NoClosedForm(params.source_pair));
    }
    let x = params.mean_photon_number;
    if x == 0.0 {
        return Err(ExperimentError::ClosedFormSingular);
    }
    let denominator = super::closed_form_denominator(params.transmittance, params.dark_prob, x);
    Ok(1.0 - v / denominator)
}

/// Dip visibility `1 - P(0) / P(inf)`, with `P(inf)` taken at `V = 0`.
///
/// Returns 0 when no coincidences occur at all.
pub fn visibility(params: &ExperimentParams, method: Method) -> Result<f64, ExperimentError> {
    let v0 = params.overlap.peak();
    let (dip, base) = match method {
        Method::Exact => (
            coincidence_exact_at_overlap(params, v0)?,
            coincidence_exact_at_overlap(params, 0.0)?,
        ),
        Method::ClosedForm => (
            closed_form_at_overlap(params, v0)?,
            closed_form_at_overlap(params, 0.0)?,
        ),
    };
    if base <= 0.0 {
        return Ok(0.0);
    }
    Ok((1.0 - dip / base).clamp(0.0, 1.0))
}

/// Exact visibility when the coherent pulse is replaced by a second,
/// independent heralded photon with the same loss and overlap.
/// `mean_photon_number` and `source_pair` of `params` are ignored.
pub fn two_photon_visibility(params: &ExperimentParams) -> Result<f64, ExperimentError> {
    visibility(
        &params.with_source_pair(SourcePair::SingleVsSingle),
        Method::Exact,
    )
}

/// Exact visibility for two phase-randomized coherent pulses, each with
/// mean photon number `params.mean_photon_number`. Never exceeds 1/2.
pub fn classical_baseline_visibility(params: &ExperimentParams) -> Result<f64, ExperimentError> {
    visibility(
        &params.with_source_pair(SourcePair::CoherentVsCoherentPhaseAveraged),
        Method::Exact,
    )
}
