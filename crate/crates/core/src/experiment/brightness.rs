use super::ExperimentError;

/// Upper end of the search bracket for the optimal mean photon number.
const BRACKET_UPPER: f64 = 4.0;
const BRACKET_LOWER: f64 = 1e-12;

/// Result of optimizing the coherent pulse's mean photon number.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum BrightnessOptimum {
    /// Interior minimum of the closed-form dip depth, found numerically
    /// and from the stationarity condition.
    Interior { numeric: f64, analytic: f64 },
    /// Without dark counts the denominator only grows with brightness, so
    /// the pulse should be as dim as possible.
    Boundary,
}

/// Denominator of the closed-form dip,
/// `f(x) = (1 + 2d / (T x)) (1 + d/T + x/2)`. Visibility is `V / f(x)`.
pub fn closed_form_denominator(transmittance: f64, dark_prob: f64, x: f64) -> f64 {
    (1.0 + 2.0 * dark_prob / (transmittance * x)) * (1.0 + dark_prob / transmittance + x / 2.0)
}

/// Mean photon number `|alpha|^2` minimizing [`closed_form_denominator`],
/// i.e. maximizing the closed-form visibility.
///
/// With `a = 2d/T` and `b = 1 + d/T`, `f(x) = b + a/2 + x/2 + ab/x`, so
/// `f'(x) = 1/2 - ab/x^2` vanishes at `x* = sqrt(2ab)`. The numeric route
/// is a golden-section search on `(0, 4]` that never uses that formula.
/// Both depend on `T` and `d` only through `d/T`.
pub fn optimal_mean_photon_number(
    transmittance: f64,
    dark_prob: f64,
) -> Result<BrightnessOptimum, ExperimentError> {
    if !(transmittance > 0.0 && transmittance <= 1.0) {
        return Err(ExperimentError::Parameter {
            name: "transmittance",
            value: transmittance,
            range: "(0, 1]",
        });
    }
    if !(0.0..1.0).contains(&dark_prob) {
        return Err(ExperimentError::Parameter {
            name: "dark_prob",
            value: dark_prob,
            range: "[0, 1)",
        });
    }
    if dark_prob == 0.0 {
        return Ok(BrightnessOptimum::Boundary);
    }
    let ratio = dark_prob / transmittance;
    let analytic = (2.0 * (2.0 * ratio) * (1.0 + ratio)).sqrt();
    let f = |x: f64| closed_form_denominator(transmittance, dark_prob, x);
    let numeric = golden_section(f, BRACKET_LOWER, BRACKET_UPPER);
    if numeric >= BRACKET_UPPER * (1.0 - 1e-9) {
        return Err(ExperimentError::OptimumOutsideBracket {
            analytic,
            upper: BRACKET_UPPER,
        });
    }
    Ok(BrightnessOptimum::Interior { numeric, analytic })
}

fn golden_section<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64) -> f64 {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = hi - inv_phi * (hi - lo);
    let mut d = lo + inv_phi * (hi - lo);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..400 {
        if hi - lo <= 1e-15 * (1.0 + hi.abs()) {
            break;
        }
        if fc < fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - inv_phi * (hi - lo);
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + inv_phi * (hi - lo);
            fd = f(d);
        }
    }
    0.5 * (lo + hi)
}
