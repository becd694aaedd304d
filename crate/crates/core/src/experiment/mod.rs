//! Two-pulse HOM experiment: a heralded single photon and a weak coherent
//! pulse meet on a 50:50 beamsplitter after lossy frequency conversion, and
//! two threshold detectors with dark counts watch the outputs.
//!
//! The exact model runs the whole chain through the Fock engine. The
//! closed form is the small-loss, small-dark-count approximation of the
//! same chain. Both are parameterized by [`ExperimentParams`].

mod brightness;
mod dip;
mod model;

pub use brightness::{closed_form_denominator, optimal_mean_photon_number, BrightnessOptimum};
pub use dip::{fit_gaussian_dip, scan_dip, DipCurve, DipFit};
pub use model::{
    branch_coincidences, classical_baseline_visibility, coincidence_closed_form, coincidence_exact,
    coincidence_exact_at_overlap, two_photon_visibility, visibility, BranchCoincidences,
    PHASE_GRID_POINTS,
};

use crate::fock::{FockError, DEFAULT_CUTOFF};
use crate::spectral::{overlap_v_closed, SpectralError, SpectralWidth};

/// Which two light sources interfere.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SourcePair {
    /// Heralded single photon against a weak coherent pulse.
    SingleVsCoherent,
    /// Two independent heralded single photons.
    SingleVsSingle,
    /// Two coherent pulses of equal mean photon number with a uniformly
    /// random relative phase (the classical-wave reference).
    CoherentVsCoherentPhaseAveraged,
}

impl SourcePair {
    pub fn name(self) -> &'static str {
        match self {
            SourcePair::SingleVsCoherent => "single_vs_coherent",
            SourcePair::SingleVsSingle => "single_vs_single",
            SourcePair::CoherentVsCoherentPhaseAveraged => "coherent_vs_coherent_phase_averaged",
        }
    }
}

/// How the two pulses' mode overlap `V` is specified.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ModeOverlap {
    /// Gaussian spectra; `V(tau)` follows from the two widths.
    Spectral {
        heralded: SpectralWidth,
        coherent: SpectralWidth,
    },
    /// A delay-independent overlap.
    Fixed { v0: f64 },
    /// `V(0) = v0`, with the delay dependence of the two Gaussian spectra.
    Pinned {
        v0: f64,
        heralded: SpectralWidth,
        coherent: SpectralWidth,
    },
}

impl ModeOverlap {
    /// `V(tau)`.
    pub fn at(&self, delay: f64) -> f64 {
        match *self {
            ModeOverlap::Spectral { heralded, coherent } => {
                overlap_v_closed(heralded, coherent, delay)
            }
            ModeOverlap::Fixed { v0 } => v0,
            ModeOverlap::Pinned {
                v0,
                heralded,
                coherent,
            } => {
                v0 * overlap_v_closed(heralded, coherent, delay)
                    / overlap_v_closed(heralded, coherent, 0.0)
            }
        }
    }

    /// `V(0)`.
    pub fn peak(&self) -> f64 {
        self.at(0.0)
    }
}

/// Measured operating point of the frequency-conversion HOM experiment.
pub mod operating_point {
    /// Overall transmittance including conversion and detection efficiency.
    pub const TRANSMITTANCE: f64 = 0.0008;
    /// Background click probability per detector and window.
    pub const DARK_PROB: f64 = 1.9e-5;
    /// Mean photon number of the coherent pulse.
    pub const MEAN_PHOTON_NUMBER: f64 = 0.43;
    /// Lower bound on the zero-delay mode overlap.
    pub const V0: f64 = 0.99;
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExperimentParams {
    /// `T` in `(0, 1]`.
    pub transmittance: f64,
    /// `d` in `[0, 1)`.
    pub dark_prob: f64,
    /// `|alpha|^2 >= 0` of each coherent pulse; unused for two single photons.
    pub mean_photon_number: f64,
    pub overlap: ModeOverlap,
    pub source_pair: SourcePair,
    /// Photons per mode kept by the Fock engine.
    pub cutoff: usize,
}

impl ExperimentParams {
    pub fn new(
        transmittance: f64,
        dark_prob: f64,
        mean_photon_number: f64,
        overlap: ModeOverlap,
    ) -> Result<Self, ExperimentError> {
        let p = Self {
            transmittance,
            dark_prob,
            mean_photon_number,
            overlap,
            source_pair: SourcePair::SingleVsCoherent,
            cutoff: DEFAULT_CUTOFF,
        };
        p.validate()?;
        Ok(p)
    }

    /// The measured operating point with a delay-independent `V = 0.99`.
    pub fn measured() -> Self {
        use operating_point::*;
        Self {
            transmittance: TRANSMITTANCE,
            dark_prob: DARK_PROB,
            mean_photon_number: MEAN_PHOTON_NUMBER,
            overlap: ModeOverlap::Fixed { v0: V0 },
            source_pair: SourcePair::SingleVsCoherent,
            cutoff: DEFAULT_CUTOFF,
        }
    }

    pub fn with_source_pair(mut self, source_pair: SourcePair) -> Self {
        self.source_pair = source_pair;
        self
    }

    pub fn with_cutoff(mut self, cutoff: usize) -> Self {
        self.cutoff = cutoff;
        self
    }

    pub fn with_overlap(mut self, overlap: ModeOverlap) -> Self {
        self.overlap = overlap;
        self
    }

    pub fn with_mean_photon_number(mut self, x: f64) -> Self {
        self.mean_photon_number = x;
        self
    }

    pub fn validate(&self) -> Result<(), ExperimentError> {
        check(
            "transmittance",
            self.transmittance,
            self.transmittance > 0.0 && self.transmittance <= 1.0,
            "(0, 1]",
        )?;
        check(
            "dark_prob",
            self.dark_prob,
            (0.0..1.0).contains(&self.dark_prob),
            "[0, 1)",
        )?;
        check(
            "mean_photon_number",
            self.mean_photon_number,
            self.mean_photon_number >= 0.0 && self.mean_photon_number.is_finite(),
            "[0, inf)",
        )?;
        if let ModeOverlap::Fixed { v0 } | ModeOverlap::Pinned { v0, .. } = self.overlap {
            check("v0", v0, v0 > 0.0 && v0 <= 1.0, "(0, 1]")?;
        }
        if self.cutoff < 2 {
            return Err(ExperimentError::Parameter {
                name: "cutoff",
                value: self.cutoff as f64,
                range: "[2, inf)",
            });
        }
        Ok(())
    }
}

fn check(
    name: &'static str,
    value: f64,
    ok: bool,
    range: &'static str,
) -> Result<(), ExperimentError> {
    if ok {
        Ok(())
    } else {
        Err(ExperimentError::Parameter { name, value, range })
    }
}

/// Which coincidence model to evaluate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    Exact,
    ClosedForm,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Fock(#[from] FockError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error("{name} = {value} is outside {range}")]
    Parameter {
        name: &'static str,
        value: f64,
        range: &'static str,
    },
    #[error("the closed form divides by T|alpha|^2 and is singular at |alpha|^2 = 0; use the exact model")]
    ClosedFormSingular,
    #[error("no closed form exists for source pair {}", .0.name())]
    NoClosedForm(SourcePair),
    #[error("operation needs source pair {}, got {}", .expected.name(), .actual.name())]
    WrongSourcePair {
        expected: SourcePair,
        actual: SourcePair,
    },
    #[error(
        "stationary point |alpha|^2 = {analytic} lies outside the search bracket (0, {upper}]"
    )]
    OptimumOutsideBracket { analytic: f64, upper: f64 },
    #[error("phase average did not settle: {coarse} vs {fine} with {points} points")]
    PhaseAverage {
        coarse: f64,
        fine: f64,
        points: usize,
    },
    #[error("invalid delay grid: {0}")]
    Grid(String),
    #[error("Gaussian fit failed: {reason} (rms residual {rms:e} after {iterations} iterations)")]
    Fit {
        reason: String,
        rms: f64,
        iterations: usize,
    },
}
