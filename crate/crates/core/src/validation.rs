//! Self-checks of the engine and the models, runnable at any operating
//! point. Every check reports a measured value against a tolerance.
//!
//! ```
//! use hom_core::experiment::ExperimentParams;
//! use hom_core::validation::{run_suite, SuiteOptions};
//!
//! let options = SuiteOptions { classical_sweep: 0, ..SuiteOptions::default() };
//! let report = run_suite(&ExperimentParams::measured(), &options);
//! assert!(report.iter().all(|c| c.passed), "{report:#?}");
//! ```

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::experiment::{
    branch_coincidences, classical_baseline_visibility, closed_form_denominator, coincidence_exact,
    coincidence_exact_at_overlap, optimal_mean_photon_number, scan_dip, two_photon_visibility,
    visibility, BrightnessOptimum, ExperimentParams, Method, ModeOverlap, SourcePair,
};
use crate::fock::{
    coincidence_click_probability, Branch, Ensemble, StateVector, ThresholdDetector,
};
use crate::spectral::{overlap_delay_fwhm, overlap_v_closed, overlap_v_quadrature, SpectralWidth};

/// Tolerance for algebraic identities of the Fock engine.
pub const ALGEBRAIC_TOLERANCE: f64 = 1e-10;
/// Tolerance for closed-form against quadrature overlap.
pub const SPECTRAL_TOLERANCE: f64 = 1e-8;
/// Tolerance for results at neighbouring cutoffs.
pub const CUTOFF_TOLERANCE: f64 = 1e-8;
/// Relative agreement required of the closed form with the exact model.
pub const CLOSED_FORM_TOLERANCE: f64 = 0.01;
pub const LINEARITY_TOLERANCE: f64 = 1e-12;
pub const OPTIMUM_TOLERANCE: f64 = 1e-6;
pub const CLASSICAL_BOUND: f64 = 0.5 + 1e-6;
pub const WEAK_FIELD_FLOOR: f64 = 0.49;
pub const SYMMETRY_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    /// The measured quantity: a worst-case deviation, or a value compared
    /// against a bound.
    pub value: f64,
    pub tolerance: f64,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SuiteOptions {
    pub seed: u64,
    /// Random cases for the spectral oracle.
    pub spectral_cases: usize,
    /// Random states per Fock-engine check.
    pub fock_cases: usize,
    /// Random operating points for the classical bound, in addition to the
    /// configured one. Each costs about a second.
    pub classical_sweep: usize,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        Self {
            seed: 0x5eed_4011,
            spectral_cases: 100,
            fock_cases: 8,
            classical_sweep: 3,
        }
    }
}

/// Runs every check that applies to `params`.
///
/// Checks that need the closed form are skipped for source pairs without
/// one. Model errors are reported as failed checks rather than aborting
/// the suite.
pub fn run_suite(params: &ExperimentParams, options: &SuiteOptions) -> Vec<CheckOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
    let mut out = vec![
        unitarity(&mut rng, options.fock_cases),
        photon_number_conservation(&mut rng, options.fock_cases),
        loss_composition(&mut rng, options.fock_cases),
        two_branch_reduction(params),
        cutoff_convergence(params),
        detector_monotonicity(params),
        spectral_agreement(&mut rng, options.spectral_cases),
        spectral_shape(&mut rng, options.spectral_cases),
    ];
    if params.source_pair == SourcePair::SingleVsCoherent {
        if params.mean_photon_number > 0.0 {
            out.push(closed_form_validity(params));
        }
        out.push(branch_linearity(params));
    }
    out.push(optimum_agreement(params));
    out.push(argmin_invariance(params));
    out.push(denominator_monotone(params));
    out.push(visibility_range(params));
    out.push(visibility_monotone_in_dark(params));
    out.push(classical_bound(params, &mut rng, options.classical_sweep));
    out.push(classical_weak_field());
    out.push(dip_symmetry(params));
    out
}

fn outcome(name: &'static str, value: f64, tolerance: f64, detail: String) -> CheckOutcome {
    CheckOutcome {
        name,
        passed: value <= tolerance,
        value,
        tolerance,
        detail,
    }
}

fn failure(name: &'static str, tolerance: f64, err: impl std::fmt::Display) -> CheckOutcome {
    CheckOutcome {
        name,
        passed: false,
        value: f64::NAN,
        tolerance,
        detail: format!("error: {err}"),
    }
}

macro_rules! attempt {
    ($name:expr, $tol:expr, $e:expr) => {
        match $e {
            Ok(v) => v,
            Err(err) => return failure($name, $tol, err),
        }
    };
}

/// Random two-mode state with support only on `n_0 + n_1 <= max_total`.
fn random_state(rng: &mut ChaCha8Rng, cutoff: usize, max_total: usize) -> StateVector {
    let vac = StateVector::vacuum(2, cutoff).expect("valid shape");
    let amps: Vec<Complex64> = (0..vac.dim())
        .map(|i| {
            let occ = vac.occupation(i);
            if occ[0] + occ[1] <= max_total {
                Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
        .collect();
    let n = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    let amps = amps.into_iter().map(|a| a / n).collect();
    StateVector::from_amplitudes(2, cutoff, amps).expect("normalized")
}

fn unitarity(rng: &mut ChaCha8Rng, cases: usize) -> CheckOutcome {
    const NAME: &str = "fock.unitarity";
    let mut worst: f64 = 0.0;
    for _ in 0..cases {
        let s = random_state(rng, 12, 12);
        let t = rng.random_range(0.0..1.0);
        let bs = attempt!(NAME, ALGEBRAIC_TOLERANCE, s.apply_beamsplitter_50_50(0, 1));
        let gen = attempt!(NAME, ALGEBRAIC_TOLERANCE, s.apply_beamsplitter(0, 1, t));
        let d = random_state(rng, 16, 3);
        let alpha = Complex64::from_polar(rng.random_range(0.0..0.8), rng.random_range(0.0..6.3));
        let disp = attempt!(NAME, ALGEBRAIC_TOLERANCE, d.apply_displacement(1, alpha));
        for n2 in [bs.norm_sqr(), gen.norm_sqr(), disp.norm_sqr()] {
            worst = worst.max((n2 - 1.0).abs());
        }
    }
    outcome(
        NAME,
        worst,
        ALGEBRAIC_TOLERANCE,
        format!("max |norm^2 - 1| over {cases} beamsplitter and displacement cases"),
    )
}

fn photon_number_conservation(rng: &mut ChaCha8Rng, cases: usize) -> CheckOutcome {
    const NAME: &str = "fock.photon_number_conservation";
    let mut worst: f64 = 0.0;
    for _ in 0..cases {
        let s = random_state(rng, 12, 12);
        let out = attempt!(NAME, ALGEBRAIC_TOLERANCE, s.apply_beamsplitter_50_50(0, 1));
        worst = worst.max((out.total_photon_number() - s.total_photon_number()).abs());
    }
    outcome(
        NAME,
        worst,
        ALGEBRAIC_TOLERANCE,
        format!("max change of total <n> over {cases} random states"),
    )
}

fn loss_composition(rng: &mut ChaCha8Rng, cases: usize) -> CheckOutcome {
    const NAME: &str = "fock.loss_composition";
    let mut worst: f64 = 0.0;
    for _ in 0..cases {
        let s = attempt!(
            NAME,
            ALGEBRAIC_TOLERANCE,
            Ensemble::pure(random_state(rng, 5, 10))
        );
        let (t1, t2) = (rng.random_range(0.0..1.0), rng.random_range(0.0..1.0));
        let mode = rng.random_range(0..2);
        let once = attempt!(NAME, ALGEBRAIC_TOLERANCE, s.apply_loss(mode, t1 * t2));
        let twice = attempt!(
            NAME,
            ALGEBRAIC_TOLERANCE,
            s.apply_loss(mode, t1).and_then(|e| e.apply_loss(mode, t2))
        );
        worst = worst.max(attempt!(
            NAME,
            ALGEBRAIC_TOLERANCE,
            once.density_distance(&twice)
        ));
    }
    outcome(
        NAME,
        worst,
        ALGEBRAIC_TOLERANCE,
        format!("max density-operator distance, loss T1*T2 vs T1 then T2, {cases} states"),
    )
}

/// Generic loss on a photon in mode 0 and a coherent pulse in mode 1
/// against the two-branch form `{(T, a^dag D(sqrt(T) alpha)|0>), (1-T, D(sqrt(T) alpha)|0>)}`.
fn two_branch_reduction(params: &ExperimentParams) -> CheckOutcome {
    const NAME: &str = "fock.two_branch_reduction";
    let t = params.transmittance;
    let alpha = Complex64::new(params.mean_photon_number.min(1.0).sqrt(), 0.0);
    let build = || -> Result<(Ensemble, Ensemble), crate::fock::FockError> {
        let vac = StateVector::vacuum(2, 16)?;
        let source = vac.apply_displacement(1, alpha)?.apply_create(0)?;
        let generic = Ensemble::pure(source)?.apply_loss_to(&[0, 1], t)?;
        let lost = vac.apply_displacement(1, alpha * t.sqrt())?;
        let survived = lost.apply_create(0)?;
        let mut branches = vec![Branch {
            probability: t,
            state: survived,
        }];
        if t < 1.0 {
            branches.push(Branch {
                probability: 1.0 - t,
                state: lost,
            });
        }
        Ok((generic, Ensemble::new(branches)?))
    };
    let (generic, expected) = attempt!(NAME, ALGEBRAIC_TOLERANCE, build());
    let dist = attempt!(
        NAME,
        ALGEBRAIC_TOLERANCE,
        generic.density_distance(&expected)
    );
    outcome(
        NAME,
        dist,
        ALGEBRAIC_TOLERANCE,
        format!(
            "density distance at T = {t}, |alpha|^2 = {}; {} branches",
            alpha.norm_sqr(),
            generic.len()
        ),
    )
}

fn cutoff_convergence(params: &ExperimentParams) -> CheckOutcome {
    const NAME: &str = "fock.cutoff_convergence";
    let mut worst: f64 = 0.0;
    let x_values = [params.mean_photon_number.min(1.0), 1.0];
    for x in x_values {
        let p = params.with_mean_photon_number(x);
        let v0 = p.overlap.peak();
        for v in [v0, 0.0] {
            let at = |n: usize| coincidence_exact_at_overlap(&p.with_cutoff(n), v);
            let p12 = attempt!(NAME, CUTOFF_TOLERANCE, at(12));
            let p14 = attempt!(NAME, CUTOFF_TOLERANCE, at(14));
            let p16 = attempt!(NAME, CUTOFF_TOLERANCE, at(16));
            worst = worst.max((p12 - p14).abs()).max((p14 - p16).abs());
        }
    }
    outcome(
        NAME,
        worst,
        CUTOFF_TOLERANCE,
        "max |P(N) - P(N+2)| for N in {12, 14}, |alpha|^2 in {min(x, 1), 1}".into(),
    )
}

fn detector_monotonicity(params: &ExperimentParams) -> CheckOutcome {
    const NAME: &str = "fock.detector_monotonicity";
    let alpha = Complex64::new(params.mean_photon_number.min(1.0).sqrt(), 0.0);
    let ensemble = attempt!(
        NAME,
        0.0,
        StateVector::vacuum(2, 16)
            .and_then(|s| s.apply_displacement(1, alpha))
            .and_then(|s| s.apply_create(0))
            .and_then(|s| s.apply_beamsplitter_50_50(0, 1))
            .and_then(Ensemble::pure)
            .and_then(|e| e.apply_loss_to(&[0, 1], params.transmittance))
    );
    let mut previous = 0.0;
    let mut worst_drop: f64 = 0.0;
    for d in [0.0, 1e-6, 1e-4, 1e-2, 0.1, 0.5, 0.9] {
        let det = attempt!(NAME, 0.0, ThresholdDetector::new(d));
        let p = attempt!(
            NAME,
            0.0,
            coincidence_click_probability(&ensemble, &[0], &[1], &det)
        );
        worst_drop = worst_drop.max(previous - p);
        previous = p;
    }
    outcome(
        NAME,
        worst_drop,
        0.0,
        "largest decrease of the coincidence probability as d grows".into(),
    )
}

fn random_widths(rng: &mut ChaCha8Rng) -> (SpectralWidth, SpectralWidth, f64) {
    let mut width = || {
        let s = 10f64.powf(rng.random_range(10.5..13.0));
        SpectralWidth::new(s).expect("positive")
    };
    let (p, w) = (width(), width());
    let scale = (p.sigma_omega().powi(-2) + w.sigma_omega().powi(-2)).sqrt();
    let delay = rng.random_range(-4.0..4.0) * scale;
    (p, w, delay)
}

fn spectral_agreement(rng: &mut ChaCha8Rng, cases: usize) -> CheckOutcome {
    const NAME: &str = "spectral.quadrature_agreement";
    let mut worst: f64 = 0.0;
    for _ in 0..cases {
        let (p, w, delay) = random_widths(rng);
        let q = attempt!(NAME, SPECTRAL_TOLERANCE, overlap_v_quadrature(p, w, delay));
        worst = worst.max((q - overlap_v_closed(p, w, delay)).abs());
    }
    outcome(
        NAME,
        worst,
        SPECTRAL_TOLERANCE,
        format!("max |V_closed - V_quadrature| over {cases} random cases"),
    )
}

fn spectral_shape(rng: &mut ChaCha8Rng, cases: usize) -> CheckOutcome {
    const NAME: &str = "spectral.even_and_bounded";
    let mut worst: f64 = 0.0;
    for _ in 0..cases {
        let (p, w, delay) = random_widths(rng);
        let (a, b) = (
            overlap_v_closed(p, w, delay),
            overlap_v_closed(p, w, -delay),
        );
        worst = worst.max((a - b).abs()).max(a - 1.0).max(-a);
    }
    outcome(
        NAME,
        worst,
        0.0,
        format!("max of |V(t) - V(-t)|, V - 1 and -V over {cases} random cases"),
    )
}

fn closed_form_validity(params: &ExperimentParams) -> CheckOutcome {
    const NAME: &str = "experiment.closed_form_validity";
    let exact = attempt!(
        NAME,
        CLOSED_FORM_TOLERANCE,
        visibility(params, Method::Exact)
    );
    let closed = attempt!(
        NAME,
        CLOSED_FORM_TOLERANCE,
        visibility(params, Method::ClosedForm)
    );
    let rel = if exact > 0.0 {
        (exact - closed).abs() / exact
    } else {
        f64::INFINITY
    };
    outcome(
        NAME,
        rel,
        CLOSED_FORM_TOLERANCE,
        format!(
            "exact {exact:.9}, closed form {closed:.9} at T = {}, d = {}; the closed form assumes T << 1 and d << 1",
            params.transmittance, params.dark_prob
        ),
    )
}

fn branch_linearity(params: &ExperimentParams) -> CheckOutcome {
    const NAME: &str = "experiment.branch_linearity";
    let mut worst: f64 = 0.0;
    let mut worst_rel: f64 = 0.0;
    for v in [params.overlap.peak(), 0.0] {
        let full = attempt!(
            NAME,
            LINEARITY_TOLERANCE,
            coincidence_exact_at_overlap(params, v)
        );
        let parts = attempt!(NAME, LINEARITY_TOLERANCE, branch_coincidences(params, v));
        let diff = (full - parts.mixture).abs();
        worst = worst.max(diff);
        if full > 0.0 {
            worst_rel = worst_rel.max(diff / full);
        }
    }
    outcome(
        NAME,
        worst,
        LINEARITY_TOLERANCE,
        format!("|P - (T P_T + (1-T) P_R)| at V(0) and V = 0; relative {worst_rel:.3e}"),
    )
}

fn optimum_agreement(params: &ExperimentParams) -> CheckOutcome {
    const NAME: &str = "experiment.optimum_agreement";
    match optimal_mean_photon_number(params.transmittance, params.dark_prob) {
        Ok(BrightnessOptimum::Interior { numeric, analytic }) => outcome(
            NAME,
            (numeric / analytic - 1.0).abs(),
            OPTIMUM_TOLERANCE,
            format!("numeric x* = {numeric:.9}, analytic x* = {analytic:.9}"),
        ),
        Ok(BrightnessOptimum::Boundary) => outcome(
            NAME,
            0.0,
            OPTIMUM_TOLERANCE,
            "d = 0: no interior optimum".into(),
        ),
        Err(e) => failure(NAME, OPTIMUM_TOLERANCE, e),
    }
}

fn argmin_invariance(params: &ExperimentParams) -> CheckOutcome {
    const NAME: &str = "experiment.argmin_invariance";
    let (t, d) = (params.transmittance, params.dark_prob);
    let x_star = |t, d| match optimal_mean_photon_number(t, d) {
        Ok(BrightnessOptimum::Interior { numeric, .. }) => Ok(numeric),
        Ok(BrightnessOptimum::Boundary) => Ok(0.0),
        Err(e) => Err(e),
    };
    let base = attempt!(NAME, OPTIMUM_TOLERANCE, x_star(t, d));
    let mut worst: f64 = 0.0;
    for c in [0.5, 0.1] {
        let scaled = attempt!(NAME, OPTIMUM_TOLERANCE, x_star(c * t, c * d));
        let dev = if base == 0.0 {
            scaled.abs()
        } else {
            (scaled / base - 1.0).abs()
        };
        worst = worst.max(dev);
    }
    outcome(
        NAME,
        worst,
        OPTIMUM_TOLERANCE,
        "relative change of x* under (T, d) -> (cT, cd), c in {0.5, 0.1}".into(),
    )
}

fn denominator_monotone(params: &ExperimentParams) -> CheckOutcome {
    const NAME: &str = "experiment.denominator_monotone";
    let (t, d) = (params.transmittance, params.dark_prob);
    let start = match optimal_mean_photon_number(t, d) {
        Ok(BrightnessOptimum::Interior { analytic, .. }) => analytic,
        Ok(BrightnessOptimum::Boundary) => 1e-6,
        Err(e) => return failure(NAME, 0.0, e),
    };
    let f = |x| closed_form_denominator(t, d, x);
    let xs: Vec<f64> = (1..=40).map(|k| start * (1.0 + 0.1 * k as f64)).collect();
    let worst = xs
        .windows(2)
        .map(|w| f(w[0]) - f(w[1]))
        .fold(f64::NEG_INFINITY, f64::max);
    CheckOutcome {
        name: NAME,
        passed: worst < 0.0,
        value: worst,
        tolerance: 0.0,
        detail: "max f(x_k) - f(x_(k+1)) on x > x*; must be negative".into(),
    }
}

fn visibility_range(params: &ExperimentParams) -> CheckOutcome {
    const NAME: &str = "experiment.visibility_range";
    let mut values = vec![attempt!(NAME, 0.0, visibility(params, Method::Exact))];
    if params.source_pair == SourcePair::SingleVsCoherent && params.mean_photon_number > 0.0 {
        values.push(attempt!(NAME, 0.0, visibility(params, Method::ClosedForm)));
    }
    values.push(attempt!(NAME, 0.0, two_photon_visibility(params)));
    let worst = values
        .iter()
        .map(|v| (v - 1.0).max(-v))
        .fold(f64::NEG_INFINITY, f64::max);
    let worst = if values.iter().all(|v| v.is_finite()) {
        worst
    } else {
        f64::INFINITY
    };
    outcome(
        NAME,
        worst.max(0.0),
        0.0,
        format!("visibilities {values:?} must lie in [0, 1]"),
    )
}

fn visibility_monotone_in_dark(params: &ExperimentParams) -> CheckOutcome {
    const NAME: &str = "experiment.visibility_monotone_in_dark";
    let darks = [0.0, 1e-5, 1e-4, 1e-3];
    let mut worst_rise: f64 = 0.0;
    let mut previous = f64::INFINITY;
    for d in darks {
        let p = ExperimentParams {
            dark_prob: d,
            ..*params
        };
        let v = attempt!(NAME, 0.0, visibility(&p, Method::Exact));
        worst_rise = worst_rise.max(v - previous);
        previous = v;
    }
    outcome(
        NAME,
        worst_rise,
        0.0,
        format!("largest increase of the exact visibility for d in {darks:?}"),
    )
}

fn classical_bound(params: &ExperimentParams, rng: &mut ChaCha8Rng, sweep: usize) -> CheckOutcome {
    const NAME: &str = "experiment.classical_bound";
    let mut points = vec![params.with_mean_photon_number(params.mean_photon_number.min(1.0))];
    for _ in 0..sweep {
        points.push(ExperimentParams {
            transmittance: rng.random_range(0.01..=1.0),
            dark_prob: if rng.random_bool(0.5) {
                0.0
            } else {
                10f64.powf(rng.random_range(-6.0..-3.0))
            },
            mean_photon_number: rng.random_range(0.01..1.0),
            overlap: ModeOverlap::Fixed {
                v0: rng.random_range(0.05..=1.0),
            },
            ..*params
        });
    }
    let mut worst = f64::NEG_INFINITY;
    for p in &points {
        worst = worst.max(attempt!(
            NAME,
            CLASSICAL_BOUND,
            classical_baseline_visibility(p)
        ));
    }
    outcome(
        NAME,
        worst,
        CLASSICAL_BOUND,
        format!(
            "max phase-averaged coherent-pair visibility over {} operating points",
            points.len()
        ),
    )
}

fn classical_weak_field() -> CheckOutcome {
    const NAME: &str = "experiment.classical_weak_field";
    let p = attempt!(
        NAME,
        WEAK_FIELD_FLOOR,
        ExperimentParams::new(1.0, 0.0, 0.01, ModeOverlap::Fixed { v0: 1.0 })
    );
    let v = attempt!(NAME, WEAK_FIELD_FLOOR, classical_baseline_visibility(&p));
    CheckOutcome {
        name: NAME,
        passed: v >= WEAK_FIELD_FLOOR,
        value: v,
        tolerance: WEAK_FIELD_FLOOR,
        detail: "visibility at |alpha|^2 = 0.01, T = 1, d = 0, V0 = 1; must reach the floor".into(),
    }
}

fn dip_symmetry(params: &ExperimentParams) -> CheckOutcome {
    const NAME: &str = "experiment.dip_symmetry";
    let width = match params.overlap {
        ModeOverlap::Spectral { heralded, coherent }
        | ModeOverlap::Pinned {
            heralded, coherent, ..
        } => overlap_delay_fwhm(heralded, coherent),
        ModeOverlap::Fixed { .. } => 1e-11,
    };
    let delays: Vec<f64> = (-2..=2).map(|k| k as f64 * 0.37 * width).collect();
    let curve = attempt!(
        NAME,
        SYMMETRY_TOLERANCE,
        scan_dip(params, &delays, Method::Exact)
    );
    let p = &curve.probabilities;
    let n = p.len();
    let mut worst: f64 = 0.0;
    for i in 0..n / 2 {
        let scale = p[i].abs().max(p[n - 1 - i].abs());
        if scale > 0.0 {
            worst = worst.max((p[i] - p[n - 1 - i]).abs() / scale);
        }
    }
    let direct = attempt!(
        NAME,
        SYMMETRY_TOLERANCE,
        coincidence_exact(params, -delays[4])
    );
    if p[4] > 0.0 {
        worst = worst.max((direct - p[4]).abs() / p[4]);
    }
    outcome(
        NAME,
        worst,
        SYMMETRY_TOLERANCE,
        "relative |P(t) - P(-t)| on a symmetric five-point grid".into(),
    )
}
