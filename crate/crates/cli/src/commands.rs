use hom_core::experiment::{
    classical_baseline_visibility, closed_form_denominator, coincidence_exact_at_overlap,
    fit_gaussian_dip, optimal_mean_photon_number, scan_dip, two_photon_visibility, visibility,
    BrightnessOptimum, DipCurve, ExperimentError, Method, SourcePair,
};
use hom_core::spectral::{overlap_delay_fwhm, overlap_v_closed, telecom, SpectralWidth};
use hom_core::validation::{run_suite, SuiteOptions};
use serde::Serialize;

use crate::config::{RunConfig, Spectral};
use crate::report::{Curve, Fit, Inputs, Num, Report};
use crate::CliError;

/// What a command produced: the JSON document, the CSV curve if it has
/// one, and a human-readable summary for the terminal.
pub struct Outcome {
    pub json: String,
    pub csv: Option<String>,
    pub summary: Vec<String>,
    pub failed: Vec<String>,
}

fn method_name(method: Method) -> &'static str {
    match method {
        Method::Exact => "exact",
        Method::ClosedForm => "closed",
    }
}

fn has_closed_form(config: &RunConfig) -> bool {
    config.params.source_pair == SourcePair::SingleVsCoherent
        && config.params.mean_photon_number > 0.0
}

#[derive(Serialize)]
struct ArmOverlap {
    model: String,
    heralded_sigma_omega: Num,
    coherent_sigma_omega: Num,
    heralded_time_fwhm_s: Num,
    coherent_time_fwhm_s: Num,
    v0: Num,
    dip_fwhm_s: Num,
}

fn arm_overlap(s: &Spectral) -> ArmOverlap {
    let (p, w): (SpectralWidth, SpectralWidth) = (s.heralded_width, s.coherent_width);
    ArmOverlap {
        model: s.model.clone(),
        heralded_sigma_omega: Num(p.sigma_omega()),
        coherent_sigma_omega: Num(w.sigma_omega()),
        heralded_time_fwhm_s: Num(p.time_fwhm()),
        coherent_time_fwhm_s: Num(w.time_fwhm()),
        v0: Num(overlap_v_closed(p, w, 0.0)),
        dip_fwhm_s: Num(overlap_delay_fwhm(p, w)),
    }
}

#[derive(Serialize)]
struct OverlapDerived {
    configured: ArmOverlap,
    default_model: ArmOverlap,
    /// `V(0)` actually used by the coincidence models.
    v0_used: Num,
}

pub fn overlap(config: &RunConfig) -> Result<Outcome, CliError> {
    let spectral = config
        .spectral
        .as_ref()
        .ok_or_else(|| CliError::Config("overlap needs a `spectral` section".into()))?;
    let default_model = Spectral::default_model(telecom::VISIBLE_WAVELENGTH)
        .map_err(|e| CliError::Model(e.to_string()))?;
    let derived = OverlapDerived {
        configured: arm_overlap(spectral),
        default_model: arm_overlap(&default_model),
        v0_used: Num(config.params.overlap.peak()),
    };
    let summary = vec![
        format!("composition: {}", spectral.model),
        format!(
            "effective sigma_omega: heralded {:.6e} rad/s, coherent {:.6e} rad/s",
            spectral.heralded_width.sigma_omega(),
            spectral.coherent_width.sigma_omega()
        ),
        format!("V(0) = {:.6}", derived.configured.v0.0),
        format!(
            "dip FWHM = {:.4} ps",
            derived.configured.dip_fwhm_s.0 * 1e12
        ),
        format!("default model V(0) = {:.6}", derived.default_model.v0.0),
    ];
    let report = Report {
        command: "overlap",
        inputs: Inputs::new(config, None),
        derived,
        curve: None,
        fit: None,
    };
    Ok(Outcome {
        json: crate::report::to_json(&report),
        csv: None,
        summary,
        failed: vec![],
    })
}

#[derive(Serialize)]
struct DipDerived {
    p_infinity_exact: Num,
    visibility_exact: Num,
    visibility_closed: Num,
}

pub fn dip(config: &RunConfig, method: Option<Method>) -> Result<Outcome, CliError> {
    let p = &config.params;
    let method = method.unwrap_or(Method::Exact);
    let closed_ok = has_closed_form(config);
    if method == Method::ClosedForm && !closed_ok {
        return Err(CliError::Model(
            ExperimentError::NoClosedForm(p.source_pair).to_string(),
        ));
    }
    let exact = scan_dip(p, &config.delays, Method::Exact)?;
    let closed = if closed_ok {
        Some(scan_dip(p, &config.delays, Method::ClosedForm)?)
    } else {
        None
    };
    let fitted: &DipCurve = match method {
        Method::Exact => &exact,
        Method::ClosedForm => closed.as_ref().expect("checked above"),
    };
    let fit = fit_gaussian_dip(fitted)?.fit.expect("fit populated");

    let p_inf = coincidence_exact_at_overlap(p, 0.0)?;
    let derived = DipDerived {
        p_infinity_exact: Num(p_inf),
        visibility_exact: Num(visibility(p, Method::Exact)?),
        visibility_closed: Num(if closed_ok {
            visibility(p, Method::ClosedForm)?
        } else {
            f64::NAN
        }),
    };
    let curve = Curve {
        delay_s: exact.delays.iter().map(|&t| Num(t)).collect(),
        p_exact: exact.probabilities.iter().map(|&v| Num(v)).collect(),
        p_closed_ratio: match &closed {
            Some(c) => c.probabilities.iter().map(|&v| Num(v)).collect(),
            None => vec![Num(f64::NAN); exact.delays.len()],
        },
    };
    let mut summary = vec![
        format!(
            "{} delays from {:.4} ps to {:.4} ps",
            exact.delays.len(),
            exact.delays[0] * 1e12,
            exact.delays[exact.delays.len() - 1] * 1e12
        ),
        format!(
            "fit ({}): visibility {:.6}, FWHM {:.4} ps, center {:.4} ps",
            method_name(method),
            fit.visibility,
            fit.fwhm * 1e12,
            fit.center * 1e12
        ),
    ];
    if let Some(w) = &fit.warning {
        summary.push(format!("warning: {w}"));
    }
    let csv = curve.to_csv();
    let report = Report {
        command: "dip",
        inputs: Inputs::new(config, Some(method_name(method))),
        derived,
        curve: Some(curve),
        fit: Some(Fit::new(method_name(method), &fit)),
    };
    Ok(Outcome {
        json: crate::report::to_json(&report),
        csv: Some(csv),
        summary,
        failed: vec![],
    })
}

#[derive(Serialize)]
struct VisibilityDerived {
    v0: Num,
    visibility_exact: Option<Num>,
    visibility_closed: Option<Num>,
    two_photon_visibility: Num,
    classical_baseline_visibility: Num,
}

pub fn visibility_cmd(config: &RunConfig, method: Option<Method>) -> Result<Outcome, CliError> {
    let p = &config.params;
    let want = |m| method.is_none() || method == Some(m);
    if method == Some(Method::ClosedForm) && !has_closed_form(config) {
        return Err(CliError::Model(
            ExperimentError::NoClosedForm(p.source_pair).to_string(),
        ));
    }
    let exact = if want(Method::Exact) {
        Some(Num(visibility(p, Method::Exact)?))
    } else {
        None
    };
    let closed = if want(Method::ClosedForm) && has_closed_form(config) {
        Some(Num(visibility(p, Method::ClosedForm)?))
    } else {
        None
    };
    let derived = VisibilityDerived {
        v0: Num(p.overlap.peak()),
        visibility_exact: exact,
        visibility_closed: closed,
        two_photon_visibility: Num(two_photon_visibility(p)?),
        classical_baseline_visibility: Num(classical_baseline_visibility(p)?),
    };
    let mut summary = vec![format!(
        "source pair {}, V(0) = {:.6}",
        p.source_pair.name(),
        derived.v0.0
    )];
    if let Some(v) = exact {
        summary.push(format!("visibility (exact) = {:.6}", v.0));
    }
    if let Some(v) = closed {
        summary.push(format!("visibility (closed form) = {:.6}", v.0));
    }
    summary.push(format!(
        "two single photons: {:.6}; phase-averaged coherent pair: {:.6}",
        derived.two_photon_visibility.0, derived.classical_baseline_visibility.0
    ));
    let report = Report {
        command: "visibility",
        inputs: Inputs::new(config, method.map(method_name)),
        derived,
        curve: None,
        fit: None,
    };
    Ok(Outcome {
        json: crate::report::to_json(&report),
        csv: None,
        summary,
        failed: vec![],
    })
}

#[derive(Serialize)]
struct OptimizeDerived {
    interior_optimum: bool,
    message: Option<String>,
    x_star: Option<Num>,
    x_star_analytic: Option<Num>,
    visibility_closed_at_x_star: Option<Num>,
    visibility_exact_at_x_star: Option<Num>,
    configured_x: Num,
    visibility_closed_at_configured_x: Option<Num>,
    visibility_exact_at_configured_x: Num,
    denominator_at_x_star: Option<Num>,
    denominator_at_configured_x: Num,
}

pub const BOUNDARY_MESSAGE: &str = "no interior optimum; brightness should be minimized";

pub fn optimize(config: &RunConfig, method: Option<Method>) -> Result<Outcome, CliError> {
    let p = config.params.with_source_pair(SourcePair::SingleVsCoherent);
    let (t, d, x) = (p.transmittance, p.dark_prob, p.mean_photon_number);
    let exact_wanted = method != Some(Method::ClosedForm);
    let closed_at = |x: f64| -> Result<Option<Num>, ExperimentError> {
        if x > 0.0 {
            Ok(Some(Num(visibility(
                &p.with_mean_photon_number(x),
                Method::ClosedForm,
            )?)))
        } else {
            Ok(None)
        }
    };
    let exact_at = |x: f64| -> Result<Num, ExperimentError> {
        if exact_wanted {
            Ok(Num(visibility(
                &p.with_mean_photon_number(x),
                Method::Exact,
            )?))
        } else {
            Ok(Num(f64::NAN))
        }
    };
    let optimum = optimal_mean_photon_number(t, d)?;
    let mut summary = Vec::new();
    let derived = match optimum {
        BrightnessOptimum::Interior { numeric, analytic } => {
            summary.push(format!("x* = {numeric:.9} (analytic {analytic:.9})"));
            let at_star = closed_at(numeric)?;
            let at_conf = closed_at(x)?;
            if let (Some(a), Some(b)) = (at_star, at_conf) {
                summary.push(format!(
                    "closed-form visibility: {:.6} at x*, {:.6} at x = {x}",
                    a.0, b.0
                ));
            }
            OptimizeDerived {
                interior_optimum: true,
                message: None,
                x_star: Some(Num(numeric)),
                x_star_analytic: Some(Num(analytic)),
                visibility_closed_at_x_star: at_star,
                visibility_exact_at_x_star: exact_wanted.then(|| exact_at(numeric)).transpose()?,
                configured_x: Num(x),
                visibility_closed_at_configured_x: at_conf,
                visibility_exact_at_configured_x: exact_at(x)?,
                denominator_at_x_star: Some(Num(closed_form_denominator(t, d, numeric))),
                denominator_at_configured_x: Num(closed_form_denominator(t, d, x)),
            }
        }
        BrightnessOptimum::Boundary => {
            summary.push(BOUNDARY_MESSAGE.to_string());
            OptimizeDerived {
                interior_optimum: false,
                message: Some(BOUNDARY_MESSAGE.into()),
                x_star: None,
                x_star_analytic: None,
                visibility_closed_at_x_star: None,
                visibility_exact_at_x_star: None,
                configured_x: Num(x),
                visibility_closed_at_configured_x: closed_at(x)?,
                visibility_exact_at_configured_x: exact_at(x)?,
                denominator_at_x_star: None,
                denominator_at_configured_x: Num(closed_form_denominator(t, d, x)),
            }
        }
    };
    let report = Report {
        command: "optimize",
        inputs: Inputs::new(config, method.map(method_name)),
        derived,
        curve: None,
        fit: None,
    };
    Ok(Outcome {
        json: crate::report::to_json(&report),
        csv: None,
        summary,
        failed: vec![],
    })
}

#[derive(Serialize)]
struct CheckOut {
    name: &'static str,
    passed: bool,
    value: Num,
    tolerance: Num,
    detail: String,
}

#[derive(Serialize)]
struct ValidateDerived {
    all_passed: bool,
    heralded_sigma_omega: Option<Num>,
    coherent_sigma_omega: Option<Num>,
    checks: Vec<CheckOut>,
}

pub fn validate(config: &RunConfig) -> Result<Outcome, CliError> {
    let mut options = SuiteOptions::default();
    if let Some(seed) = config.seed {
        options.seed = seed;
    }
    let checks = run_suite(&config.params, &options);
    let failed: Vec<String> = checks
        .iter()
        .filter(|c| !c.passed)
        .map(|c| c.name.to_string())
        .collect();
    let summary = checks
        .iter()
        .map(|c| {
            format!(
                "{} {:<40} {:.3e} (tolerance {:.1e})",
                if c.passed { "PASS" } else { "FAIL" },
                c.name,
                c.value,
                c.tolerance
            )
        })
        .collect();
    let derived = ValidateDerived {
        all_passed: failed.is_empty(),
        heralded_sigma_omega: config
            .spectral
            .as_ref()
            .map(|s| Num(s.heralded_width.sigma_omega())),
        coherent_sigma_omega: config
            .spectral
            .as_ref()
            .map(|s| Num(s.coherent_width.sigma_omega())),
        checks: checks
            .into_iter()
            .map(|c| CheckOut {
                name: c.name,
                passed: c.passed,
                value: Num(c.value),
                tolerance: Num(c.tolerance),
                detail: c.detail,
            })
            .collect(),
    };
    let report = Report {
        command: "validate",
        inputs: Inputs::new(config, None),
        derived,
        curve: None,
        fit: None,
    };
    Ok(Outcome {
        json: crate::report::to_json(&report),
        csv: None,
        summary,
        failed,
    })
}
