//! Gaussian spectral modes and their overlap.
//!
//! Widths are stored as the standard deviation `sigma` of the spectral
//! *amplitude* in angular frequency, `A(w) ~ exp(-w^2 / (2 sigma^2))`.
//! Experimental inputs are intensity FWHMs (in time or in wavelength) and
//! are converted at the boundary.
//!
//! Frequency conversion with a monochromatic pump shifts the carrier but
//! keeps angular-frequency widths, so filters acting before and after
//! conversion compose directly once they are expressed as `sigma`.

use std::f64::consts::{LN_2, PI};

use num_complex::Complex64;

use crate::quadrature::{self, NonConvergence};

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Half-width of the quadrature window, in combined standard deviations.
const QUADRATURE_SPAN: f64 = 8.0;
const QUADRATURE_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SpectralError {
    #[error("{name} must be positive and finite, got {value}")]
    NonPositive { name: &'static str, value: f64 },
    #[error("cannot cascade an empty list of filters")]
    EmptyCascade,
    #[error(transparent)]
    Quadrature(#[from] NonConvergence),
}

fn positive(name: &'static str, value: f64) -> Result<f64, SpectralError> {
    if value > 0.0 && value.is_finite() {
        Ok(value)
    } else {
        Err(SpectralError::NonPositive { name, value })
    }
}

/// `2 sqrt(ln 2)`: ratio between the intensity FWHM of a Gaussian and the
/// standard deviation of its amplitude.
fn fwhm_per_amplitude_sigma() -> f64 {
    2.0 * LN_2.sqrt()
}

/// Amplitude standard deviation of a Gaussian spectrum, in rad/s.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct SpectralWidth(f64);

impl SpectralWidth {
    pub fn new(sigma_omega: f64) -> Result<Self, SpectralError> {
        positive("sigma_omega", sigma_omega).map(Self)
    }

    pub fn sigma_omega(self) -> f64 {
        self.0
    }

    /// Width of a transform-limited Gaussian pulse whose temporal intensity
    /// FWHM is `fwhm` seconds.
    ///
    /// The field envelope `exp(-t^2 / (2 s_t^2))` has intensity FWHM
    /// `2 sqrt(ln 2) s_t`, and its Fourier transform is a Gaussian amplitude
    /// with `sigma = 1 / s_t`. Hence `sigma = 2 sqrt(ln 2) / fwhm`.
    pub fn from_time_fwhm(fwhm: f64) -> Result<Self, SpectralError> {
        let fwhm = positive("time FWHM", fwhm)?;
        Ok(Self(fwhm_per_amplitude_sigma() / fwhm))
    }

    /// Inverse of [`SpectralWidth::from_time_fwhm`].
    pub fn time_fwhm(self) -> f64 {
        fwhm_per_amplitude_sigma() / self.0
    }

    /// Width of a filter whose intensity transmission has FWHM `fwhm`
    /// meters around the carrier wavelength `center`, to first order in
    /// `fwhm / center`: `dw_FWHM = 2 pi c fwhm / center^2`, and the
    /// amplitude sigma is that divided by `2 sqrt(ln 2)`.
    pub fn from_wavelength_fwhm(fwhm: f64, center: f64) -> Result<Self, SpectralError> {
        let fwhm = positive("wavelength FWHM", fwhm)?;
        let center = positive("center wavelength", center)?;
        let omega_fwhm = 2.0 * PI * SPEED_OF_LIGHT * fwhm / (center * center);
        Ok(Self(omega_fwhm / fwhm_per_amplitude_sigma()))
    }

    /// Intensity FWHM in ordinary frequency (Hz).
    pub fn frequency_fwhm(self) -> f64 {
        self.0 * fwhm_per_amplitude_sigma() / (2.0 * PI)
    }
}

/// A band-limiting element given by its intensity FWHM.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum FilterSpec {
    /// Transform-limited pulse of the given temporal FWHM (seconds).
    TimeFwhm { fwhm: f64 },
    /// Spectral filter of the given wavelength FWHM at a carrier wavelength
    /// (both meters).
    WavelengthFwhm { fwhm: f64, center: f64 },
}

impl FilterSpec {
    pub fn width(&self) -> Result<SpectralWidth, SpectralError> {
        match *self {
            FilterSpec::TimeFwhm { fwhm } => SpectralWidth::from_time_fwhm(fwhm),
            FilterSpec::WavelengthFwhm { fwhm, center } => {
                SpectralWidth::from_wavelength_fwhm(fwhm, center)
            }
        }
    }
}

/// Effective width of Gaussian filters in series: amplitude transfer
/// functions multiply, so `1/sigma_eff^2 = sum 1/sigma_i^2`.
pub fn cascade_widths(widths: &[SpectralWidth]) -> Result<SpectralWidth, SpectralError> {
    if widths.is_empty() {
        return Err(SpectralError::EmptyCascade);
    }
    let inv: f64 = widths.iter().map(|w| w.0.powi(-2)).sum();
    SpectralWidth::new(inv.sqrt().recip())
}

/// Cascades a list of filters.
pub fn cascade_filters(filters: &[FilterSpec]) -> Result<SpectralWidth, SpectralError> {
    let widths = filters
        .iter()
        .map(FilterSpec::width)
        .collect::<Result<Vec<_>, _>>()?;
    cascade_widths(&widths)
}

/// Mode overlap `V(tau) = |<p|w(tau)>|^2` of two Gaussian spectral
/// amplitudes with relative delay `tau`:
///
/// ```text
/// V = 2 s_p s_w / (s_p^2 + s_w^2) * exp(-s_p^2 s_w^2 tau^2 / (s_p^2 + s_w^2))
/// ```
pub fn overlap_v_closed(p: SpectralWidth, w: SpectralWidth, delay: f64) -> f64 {
    let (sp2, sw2) = (p.0 * p.0, w.0 * w.0);
    let sum = sp2 + sw2;
    2.0 * p.0 * w.0 / sum * (-sp2 * sw2 * delay * delay / sum).exp()
}

/// The same overlap by adaptive quadrature of
/// `| (pi s_p s_w)^(-1/2) int exp(-i w tau) exp(-w^2/2s_p^2) exp(-w^2/2s_w^2) dw |^2`.
///
/// The integral is taken over `+-8` combined standard deviations in the
/// scaled variable `u = w / s_c`, where `1/s_c^2 = 1/s_p^2 + 1/s_w^2`.
pub fn overlap_v_quadrature(
    p: SpectralWidth,
    w: SpectralWidth,
    delay: f64,
) -> Result<f64, SpectralError> {
    let combined = cascade_widths(&[p, w])?.0;
    let kappa = combined * delay;
    let integral = quadrature::integrate(
        |u| Complex64::from_polar((-0.5 * u * u).exp(), -kappa * u),
        -QUADRATURE_SPAN,
        QUADRATURE_SPAN,
        QUADRATURE_TOLERANCE,
    )?;
    let amplitude = integral * (combined / (PI * p.0 * w.0).sqrt());
    Ok(amplitude.norm_sqr())
}

/// FWHM (seconds) of `V(tau)` as a function of delay. `V` is a Gaussian
/// `exp(-tau^2 / S)` with `S = 1/s_p^2 + 1/s_w^2`, so FWHM `= 2 sqrt(S ln 2)`.
pub fn overlap_delay_fwhm(p: SpectralWidth, w: SpectralWidth) -> f64 {
    let s = p.0.powi(-2) + w.0.powi(-2);
    2.0 * (s * LN_2).sqrt()
}

/// Filter elements of the frequency-conversion HOM setup.
pub mod telecom {
    /// Mode-locked laser pulse, temporal intensity FWHM.
    pub const LASER_PULSE_FWHM: f64 = 1.2e-12;
    /// Visible signal / herald wavelength.
    pub const VISIBLE_WAVELENGTH: f64 = 780e-9;
    /// Converted telecom wavelength.
    pub const TELECOM_WAVELENGTH: f64 = 1522e-9;
    /// Herald-arm Bragg grating bandwidth, at 780 nm.
    pub const HERALD_GRATING_FWHM: f64 = 0.2e-9;
    /// Waveguide acceptance bandwidth.
    pub const WAVEGUIDE_FWHM: f64 = 0.3e-9;
    /// Post-conversion Bragg grating bandwidth, at 1522 nm.
    pub const TELECOM_GRATING_FWHM: f64 = 1e-9;
}

/// Which filters shape each of the two interfering pulses.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralComposition {
    pub heralded: Vec<FilterSpec>,
    pub coherent: Vec<FilterSpec>,
}

impl SpectralComposition {
    /// Default reading of the conversion setup: the heralded photon is
    /// shaped by the herald grating, the waveguide acceptance and the
    /// telecom grating; the coherent pulse by its own transform-limited
    /// width, the waveguide acceptance and the telecom grating.
    /// `waveguide_center` is the wavelength at which the waveguide
    /// bandwidth is quoted.
    pub fn telecom_default(waveguide_center: f64) -> Self {
        use telecom::*;
        let waveguide = FilterSpec::WavelengthFwhm {
            fwhm: WAVEGUIDE_FWHM,
            center: waveguide_center,
        };
        let grating = FilterSpec::WavelengthFwhm {
            fwhm: TELECOM_GRATING_FWHM,
            center: TELECOM_WAVELENGTH,
        };
        Self {
            heralded: vec![
                FilterSpec::WavelengthFwhm {
                    fwhm: HERALD_GRATING_FWHM,
                    center: VISIBLE_WAVELENGTH,
                },
                waveguide,
                grating,
            ],
            coherent: vec![
                FilterSpec::TimeFwhm {
                    fwhm: LASER_PULSE_FWHM,
                },
                waveguide,
                grating,
            ],
        }
    }

    /// Effective `(heralded, coherent)` widths.
    pub fn widths(&self) -> Result<(SpectralWidth, SpectralWidth), SpectralError> {
        Ok((
            cascade_filters(&self.heralded)?,
            cascade_filters(&self.coherent)?,
        ))
    }
}

impl Default for SpectralComposition {
    fn default() -> Self {
        Self::telecom_default(telecom::VISIBLE_WAVELENGTH)
    }
}
