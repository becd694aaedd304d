use std::f64::consts::LN_2;

use nalgebra::{Matrix4, Vector4};

use super::model::{closed_form_at_overlap, coincidence_exact_at_overlap};
use super::{ExperimentError, ExperimentParams, Method};

const MIN_SCAN_POINTS: usize = 3;
const MIN_FIT_POINTS: usize = 5;
const MAX_ITERATIONS: usize = 500;
/// Relative dip depth below which width and center are unidentifiable.
const FLAT_DEPTH: f64 = 1e-9;

/// Coincidence probability sampled over relative delay.
#[derive(Clone, Debug, PartialEq)]
pub struct DipCurve {
    /// Seconds, ascending.
    pub delays: Vec<f64>,
    pub probabilities: Vec<f64>,
    pub fit: Option<DipFit>,
}

/// Least-squares fit of `B (1 - A exp(-(tau - tau0)^2 / (2 s^2)))`.
#[derive(Clone, Debug, PartialEq)]
pub struct DipFit {
    /// `A`.
    pub visibility: f64,
    /// `2 sqrt(2 ln 2) s`, seconds.
    pub fwhm: f64,
    /// `tau0`, seconds.
    pub center: f64,
    /// `B`.
    pub baseline: f64,
    pub rms_residual: f64,
    pub iterations: usize,
    pub warning: Option<String>,
}

/// Evaluates the chosen model on every delay of `delays`.
///
/// The closed form yields the ratio `P(tau)/P(inf)`; the exact model yields
/// absolute probabilities.
pub fn scan_dip(
    params: &ExperimentParams,
    delays: &[f64],
    method: Method,
) -> Result<DipCurve, ExperimentError> {
    if delays.len() < MIN_SCAN_POINTS {
        return Err(ExperimentError::Grid(format!(
            "need at least {MIN_SCAN_POINTS} delays, got {}",
            delays.len()
        )));
    }
    if delays.iter().any(|t| !t.is_finite()) {
        return Err(ExperimentError::Grid("delays must be finite".into()));
    }
    if delays.windows(2).any(|w| w[1] <= w[0]) {
        return Err(ExperimentError::Grid(
            "delays must be strictly increasing".into(),
        ));
    }
    let probabilities = delays
        .iter()
        .map(|&t| {
            let v = params.overlap.at(t);
            match method {
                Method::Exact => coincidence_exact_at_overlap(params, v),
                Method::ClosedForm => closed_form_at_overlap(params, v),
            }
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(DipCurve {
        delays: delays.to_vec(),
        probabilities,
        fit: None,
    })
}

/// Gaussian dip fit by Levenberg-Marquardt, in delays rescaled to the grid
/// span and probabilities rescaled to their maximum.
pub fn fit_gaussian_dip(curve: &DipCurve) -> Result<DipCurve, ExperimentError> {
    let n = curve.delays.len();
    if n < MIN_FIT_POINTS || curve.probabilities.len() != n {
        return Err(ExperimentError::Grid(format!(
            "fit needs at least {MIN_FIT_POINTS} matching points, got {n} delays and {} probabilities",
            curve.probabilities.len()
        )));
    }
    let y_max = curve.probabilities.iter().cloned().fold(f64::MIN, f64::max);
    let y_min = curve.probabilities.iter().cloned().fold(f64::MAX, f64::min);
    if y_max.is_nan() || y_max <= 0.0 {
        return Err(ExperimentError::Fit {
            reason: "curve has no positive values".into(),
            rms: 0.0,
            iterations: 0,
        });
    }
    let t_mid = 0.5 * (curve.delays[0] + curve.delays[n - 1]);
    let t_scale = 0.5 * (curve.delays[n - 1] - curve.delays[0]);
    let u: Vec<f64> = curve.delays.iter().map(|t| (t - t_mid) / t_scale).collect();
    let y: Vec<f64> = curve.probabilities.iter().map(|p| p / y_max).collect();

    let argmin = y
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .unwrap_or(0);

    if (y_max - y_min) / y_max < FLAT_DEPTH {
        let baseline = curve.probabilities.iter().sum::<f64>() / n as f64;
        return Ok(DipCurve {
            fit: Some(DipFit {
                visibility: 0.0,
                fwhm: 0.0,
                center: curve.delays[argmin],
                baseline,
                rms_residual: rms(&curve.probabilities, |_| baseline),
                iterations: 0,
                warning: Some("flat curve: no dip, width and center are not identifiable".into()),
            }),
            ..curve.clone()
        });
    }

    let baseline0 = y[0].max(y[n - 1]);
    let depth0 = 1.0 - y[argmin] / baseline0;
    let half_level = baseline0 * (1.0 - depth0 / 2.0);
    let below: Vec<f64> = u
        .iter()
        .zip(&y)
        .filter(|(_, &yy)| yy <= half_level)
        .map(|(&uu, _)| uu)
        .collect();
    let spacing = 2.0 / (n - 1) as f64;
    let width0 = below
        .last()
        .zip(below.first())
        .map(|(hi, lo)| hi - lo + spacing)
        .unwrap_or(spacing);
    let sigma0 = (width0 / (2.0 * (2.0 * LN_2).sqrt())).max(spacing / 4.0);
    let mut theta = Vector4::new(baseline0, depth0, u[argmin], sigma0);

    let model = |th: &Vector4<f64>, uu: f64| {
        let g = (-(uu - th[2]).powi(2) / (2.0 * th[3] * th[3])).exp();
        th[0] * (1.0 - th[1] * g)
    };
    let sse = |th: &Vector4<f64>| -> f64 {
        u.iter()
            .zip(&y)
            .map(|(&uu, &yy)| (yy - model(th, uu)).powi(2))
            .sum()
    };

    let mut lambda = 1e-3;
    let mut current = sse(&theta);
    let mut iterations = 0;
    let mut converged = false;
    while !converged && iterations < MAX_ITERATIONS {
        iterations += 1;
        let mut jtj = Matrix4::<f64>::zeros();
        let mut jtr = Vector4::<f64>::zeros();
        for (&uu, &yy) in u.iter().zip(&y) {
            let (b, a, c, s) = (theta[0], theta[1], theta[2], theta[3]);
            let du = uu - c;
            let g = (-du * du / (2.0 * s * s)).exp();
            let j = Vector4::new(
                1.0 - a * g,
                -b * g,
                -b * a * g * du / (s * s),
                -b * a * g * du * du / (s * s * s),
            );
            let r = yy - b * (1.0 - a * g);
            jtj += j * j.transpose();
            jtr += j * r;
        }
        let mut improved = false;
        while lambda < 1e16 {
            let mut damped = jtj;
            for k in 0..4 {
                damped[(k, k)] += lambda * jtj[(k, k)].max(1e-300);
            }
            let Some(step) = damped.lu().solve(&jtr) else {
                lambda *= 10.0;
                continue;
            };
            let candidate = theta + step;
            let value = sse(&candidate);
            if value.is_finite() && value <= current {
                let rel_step = step.norm() / (theta.norm() + 1e-300);
                let gain = current - value;
                theta = candidate;
                current = value;
                lambda = (lambda / 10.0).max(1e-15);
                improved = true;
                converged = rel_step < 1e-14 || gain <= 1e-30 + 1e-15 * current;
                break;
            }
            lambda *= 10.0;
        }
        // No downhill step at any damping: already at the minimum.
        converged |= !improved;
    }

    let (baseline, depth, center, sigma) = (theta[0], theta[1], theta[2], theta[3].abs());
    let rms_scaled = (current / n as f64).sqrt();
    if !(depth.is_finite() && sigma.is_finite() && baseline.is_finite()) {
        return Err(ExperimentError::Fit {
            reason: "parameters diverged".into(),
            rms: rms_scaled * y_max,
            iterations,
        });
    }
    if !(-1e-9..=1.0 + 1e-9).contains(&depth) {
        return Err(ExperimentError::Fit {
            reason: format!("fitted depth {depth} is not a dip"),
            rms: rms_scaled * y_max,
            iterations,
        });
    }
    let warning = (depth < 1e-6)
        .then(|| "dip depth is negligible; width and center are poorly determined".to_string());
    Ok(DipCurve {
        fit: Some(DipFit {
            visibility: depth.clamp(0.0, 1.0),
            fwhm: 2.0 * (2.0 * LN_2).sqrt() * sigma * t_scale,
            center: t_mid + center * t_scale,
            baseline: baseline * y_max,
            rms_residual: rms_scaled * y_max,
            iterations,
            warning,
        }),
        ..curve.clone()
    })
}

fn rms(values: &[f64], model: impl Fn(usize) -> f64) -> f64 {
    let s: f64 = values
        .iter()
        .enumerate()
        .map(|(i, v)| (v - model(i)).powi(2))
        .sum();
    (s / values.len() as f64).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn synthetic(a: f64, b: f64, c: f64, s: f64) -> DipCurve {
        let delays: Vec<f64> = (0..41).map(|i| (i as f64 - 20.0) * 1e-12).collect();
        let probabilities = delays
            .iter()
            .map(|t| b * (1.0 - a * (-(t - c).powi(2) / (2.0 * s * s)).exp()))
            .collect();
        DipCurve {
            delays,
            probabilities,
            fit: None,
        }
    }

    #[test]
    fn recovers_noiseless_gaussian() {
        let curve = synthetic(0.72, 3.4e-7, 0.8e-12, 3.3e-12);
        let fit = fit_gaussian_dip(&curve).unwrap().fit.unwrap();
        assert!((fit.visibility - 0.72).abs() < 1e-9);
        assert!((fit.center - 0.8e-12).abs() < 1e-20);
        assert!((fit.fwhm / (2.0 * (2.0 * LN_2).sqrt() * 3.3e-12) - 1.0).abs() < 1e-9);
        assert!((fit.baseline / 3.4e-7 - 1.0).abs() < 1e-9);
        assert!(fit.warning.is_none());
    }

    #[test]
    fn scaling_probabilities_scales_only_baseline() {
        let curve = synthetic(0.5, 1.0, 0.0, 4e-12);
        let mut scaled = curve.clone();
        scaled.probabilities.iter_mut().for_each(|p| *p *= 7.5);
        let f1 = fit_gaussian_dip(&curve).unwrap().fit.unwrap();
        let f2 = fit_gaussian_dip(&scaled).unwrap().fit.unwrap();
        assert!((f1.visibility - f2.visibility).abs() < 1e-12);
        assert!((f1.fwhm / f2.fwhm - 1.0).abs() < 1e-12);
        assert!((f1.center - f2.center).abs() < 1e-24);
        assert!((f2.baseline / f1.baseline - 7.5).abs() < 1e-10);
    }

    #[test]
    fn flat_curve_warns() {
        let curve = synthetic(0.0, 2.0, 0.0, 4e-12);
        let fit = fit_gaussian_dip(&curve).unwrap().fit.unwrap();
        assert_eq!(fit.visibility, 0.0);
        assert!(fit.warning.is_some());
    }

    #[test]
    fn too_few_points() {
        let mut curve = synthetic(0.5, 1.0, 0.0, 4e-12);
        curve.delays.truncate(4);
        curve.probabilities.truncate(4);
        assert!(matches!(
            fit_gaussian_dip(&curve),
            Err(ExperimentError::Grid(_))
        ));
    }

    #[test]
    fn bad_scan_grids() {
        let p = ExperimentParams::measured();
        assert!(scan_dip(&p, &[0.0, 1e-12], Method::ClosedForm).is_err());
        assert!(scan_dip(&p, &[0.0, 2e-12, 1e-12], Method::ClosedForm).is_err());
        assert!(scan_dip(&p, &[0.0, 1e-12, f64::NAN], Method::ClosedForm).is_err());
    }
}
