//! Run configuration: the JSON schema, unit parsing and resolution into
//! model parameters.

use std::fmt;
use std::path::{Path, PathBuf};

use hom_core::experiment::{ExperimentParams, ModeOverlap, SourcePair};
use hom_core::fock::DEFAULT_CUTOFF;
use hom_core::spectral::{telecom, FilterSpec, SpectralComposition, SpectralWidth, SPEED_OF_LIGHT};
use serde::de::{self, Deserializer, Visitor};
use serde::Deserialize;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("{path}: line {line}, column {column}: field `{field}`: {message}")]
    Parse {
        path: String,
        line: usize,
        column: usize,
        field: String,
        message: String,
    },
    #[error("cannot read {path}: {source}")]
    Read {
        path: String,
        source: std::io::Error,
    },
    #[error("field `{field}`: {message}")]
    Invalid { field: String, message: String },
}

fn invalid(field: impl Into<String>, message: impl fmt::Display) -> ConfigError {
    ConfigError::Invalid {
        field: field.into(),
        message: message.to_string(),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Json,
    Csv,
}

/// How a stage position in millimeters maps to a delay.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StageConvention {
    /// The length is the optical path difference: `tau = L / c`.
    #[default]
    OpticalPath,
    /// The length is the travel of a retro-reflecting mirror pair, which
    /// lengthens the path twice: `tau = 2 L / c`.
    MirrorTravel,
}

impl StageConvention {
    pub fn name(self) -> &'static str {
        match self {
            StageConvention::OpticalPath => "optical_path",
            StageConvention::MirrorTravel => "mirror_travel",
        }
    }

    pub fn delay(self, length: f64) -> f64 {
        match self {
            StageConvention::OpticalPath => length / SPEED_OF_LIGHT,
            StageConvention::MirrorTravel => 2.0 * length / SPEED_OF_LIGHT,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum Dimension {
    Time,
    Length,
}

/// A number in SI units, or a string with a unit suffix such as `"1.2 ps"`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Quantity {
    value: f64,
    dimension: Option<Dimension>,
}

impl Quantity {
    fn parse(text: &str) -> Result<Self, String> {
        let text = text.trim();
        let split = text
            .find(|c: char| c.is_ascii_alphabetic() || c == 'µ' || c == 'μ')
            .ok_or_else(|| {
                format!("`{text}` has no unit; write e.g. \"1.2 ps\" or a bare SI number")
            })?;
        let (number, unit) = text.split_at(split);
        let value: f64 = number
            .trim()
            .parse()
            .map_err(|_| format!("`{}` is not a number", number.trim()))?;
        let (scale, dimension) = match unit.trim() {
            "fs" => (1e-15, Dimension::Time),
            "ps" => (1e-12, Dimension::Time),
            "ns" => (1e-9, Dimension::Time),
            "us" | "µs" | "μs" => (1e-6, Dimension::Time),
            "s" => (1.0, Dimension::Time),
            "nm" => (1e-9, Dimension::Length),
            "um" | "µm" | "μm" => (1e-6, Dimension::Length),
            "mm" => (1e-3, Dimension::Length),
            "m" => (1.0, Dimension::Length),
            other => return Err(format!("unknown unit `{other}`")),
        };
        if !value.is_finite() {
            return Err(format!("`{text}` is not finite"));
        }
        Ok(Self {
            value: value * scale,
            dimension: Some(dimension),
        })
    }

    fn seconds(self, field: &str) -> Result<f64, ConfigError> {
        match self.dimension {
            None | Some(Dimension::Time) => Ok(self.value),
            Some(Dimension::Length) => Err(invalid(field, "expected a time, got a length")),
        }
    }

    fn meters(self, field: &str) -> Result<f64, ConfigError> {
        match self.dimension {
            None | Some(Dimension::Length) => Ok(self.value),
            Some(Dimension::Time) => Err(invalid(field, "expected a length, got a time")),
        }
    }

    /// Delays given as lengths are stage positions.
    fn delay(self, stage: StageConvention) -> f64 {
        match self.dimension {
            Some(Dimension::Length) => stage.delay(self.value),
            _ => self.value,
        }
    }
}

impl<'de> Deserialize<'de> for Quantity {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct QuantityVisitor;

        impl Visitor<'_> for QuantityVisitor {
            type Value = Quantity;

            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a number in SI units or a string such as \"1.2 ps\"")
            }

            fn visit_f64<E: de::Error>(self, v: f64) -> Result<Quantity, E> {
                Ok(Quantity {
                    value: v,
                    dimension: None,
                })
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> Result<Quantity, E> {
                self.visit_f64(v as f64)
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> Result<Quantity, E> {
                self.visit_f64(v as f64)
            }

            fn visit_str<E: de::Error>(self, v: &str) -> Result<Quantity, E> {
                Quantity::parse(v).map_err(E::custom)
            }
        }

        deserializer.deserialize_any(QuantityVisitor)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
enum FilterKind {
    TimeFwhm,
    WavelengthFwhm,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFilter {
    kind: FilterKind,
    value: Quantity,
    #[serde(default)]
    center: Option<Quantity>,
    #[serde(default)]
    label: Option<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
enum Preset {
    Default,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpectral {
    #[serde(default)]
    preset: Option<Preset>,
    #[serde(default)]
    waveguide_center: Option<Quantity>,
    #[serde(default)]
    heralded: Option<Vec<RawFilter>>,
    #[serde(default)]
    coherent: Option<Vec<RawFilter>>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGrid {
    start: Quantity,
    stop: Quantity,
    steps: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
enum RawSourcePair {
    SingleVsCoherent,
    SingleVsSingle,
    CoherentVsCoherentPhaseAveraged,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct RawConfig {
    transmittance: f64,
    dark_prob: f64,
    mean_photon_number: f64,
    source_pair: RawSourcePair,
    v0: Option<f64>,
    spectral: Option<RawSpectral>,
    delay_grid: RawGrid,
    stage_convention: StageConvention,
    cutoff: usize,
    seed: Option<u64>,
    format: Option<Format>,
    output: Option<PathBuf>,
}

impl Default for RawConfig {
    fn default() -> Self {
        use hom_core::experiment::operating_point::*;
        Self {
            transmittance: TRANSMITTANCE,
            dark_prob: DARK_PROB,
            mean_photon_number: MEAN_PHOTON_NUMBER,
            source_pair: RawSourcePair::SingleVsCoherent,
            v0: Some(V0),
            spectral: Some(RawSpectral {
                preset: Some(Preset::Default),
                ..RawSpectral::default()
            }),
            delay_grid: RawGrid {
                start: Quantity::parse("-25 ps").expect("literal"),
                stop: Quantity::parse("25 ps").expect("literal"),
                steps: 51,
            },
            stage_convention: StageConvention::default(),
            cutoff: DEFAULT_CUTOFF,
            seed: None,
            format: None,
            output: None,
        }
    }
}

/// One named filter of a resolved composition.
#[derive(Clone, Debug, PartialEq)]
pub struct NamedFilter {
    pub label: String,
    pub spec: FilterSpec,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Spectral {
    /// Human-readable name of the composition model.
    pub model: String,
    pub heralded: Vec<NamedFilter>,
    pub coherent: Vec<NamedFilter>,
    pub heralded_width: SpectralWidth,
    pub coherent_width: SpectralWidth,
}

impl Spectral {
    fn from_composition(
        model: String,
        composition: &SpectralComposition,
        labels: (&[&str], &[&str]),
    ) -> Result<Self, ConfigError> {
        let name = |specs: &[FilterSpec], labels: &[&str]| {
            specs
                .iter()
                .zip(labels)
                .map(|(s, l)| NamedFilter {
                    label: l.to_string(),
                    spec: *s,
                })
                .collect()
        };
        let (heralded_width, coherent_width) =
            composition.widths().map_err(|e| invalid("spectral", e))?;
        Ok(Self {
            model,
            heralded: name(&composition.heralded, labels.0),
            coherent: name(&composition.coherent, labels.1),
            heralded_width,
            coherent_width,
        })
    }

    /// The built-in composition with the waveguide bandwidth quoted at
    /// `waveguide_center`.
    pub fn default_model(waveguide_center: f64) -> Result<Self, ConfigError> {
        Self::from_composition(
            format!(
                "default: heralded = herald grating + waveguide + telecom grating, \
                 coherent = laser pulse + waveguide + telecom grating; \
                 waveguide FWHM quoted at {:.0} nm",
                waveguide_center * 1e9
            ),
            &SpectralComposition::telecom_default(waveguide_center),
            (
                &["herald grating", "waveguide", "telecom grating"],
                &["laser pulse", "waveguide", "telecom grating"],
            ),
        )
    }
}

/// A fully resolved run.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub params: ExperimentParams,
    pub spectral: Option<Spectral>,
    pub delays: Vec<f64>,
    pub stage_convention: StageConvention,
    pub seed: Option<u64>,
    pub format: Option<Format>,
    pub output: Option<PathBuf>,
}

impl RunConfig {
    /// The configuration used when no file is given.
    pub fn builtin() -> Self {
        RawConfig::default()
            .resolve()
            .expect("built-in configuration is valid")
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(&text, &path.display().to_string())
    }

    /// Parses JSON text; `origin` names the source in diagnostics.
    pub fn parse(text: &str, origin: &str) -> Result<Self, ConfigError> {
        let mut de = serde_json::Deserializer::from_str(text);
        let raw: RawConfig = serde_path_to_error::deserialize(&mut de).map_err(|e| {
            let field = e.path().to_string();
            let inner = e.into_inner();
            ConfigError::Parse {
                path: origin.to_string(),
                line: inner.line(),
                column: inner.column(),
                field,
                message: strip_position(&inner.to_string()),
            }
        })?;
        de.end().map_err(|e| ConfigError::Parse {
            path: origin.to_string(),
            line: e.line(),
            column: e.column(),
            field: ".".into(),
            message: strip_position(&e.to_string()),
        })?;
        raw.resolve()
    }
}

fn strip_position(message: &str) -> String {
    match message.rfind(" at line ") {
        Some(i) => message[..i].to_string(),
        None => message.to_string(),
    }
}

fn resolve_filters(list: &[RawFilter], field: &str) -> Result<Vec<NamedFilter>, ConfigError> {
    if list.is_empty() {
        return Err(invalid(field, "needs at least one filter"));
    }
    list.iter()
        .enumerate()
        .map(|(i, f)| {
            let at = |name: &str| format!("{field}[{i}].{name}");
            let spec = match f.kind {
                FilterKind::TimeFwhm => {
                    if f.center.is_some() {
                        return Err(invalid(at("center"), "not used by a time_fwhm filter"));
                    }
                    FilterSpec::TimeFwhm {
                        fwhm: f.value.seconds(&at("value"))?,
                    }
                }
                FilterKind::WavelengthFwhm => FilterSpec::WavelengthFwhm {
                    fwhm: f.value.meters(&at("value"))?,
                    center: f
                        .center
                        .ok_or_else(|| invalid(at("center"), "required for wavelength_fwhm"))?
                        .meters(&at("center"))?,
                },
            };
            spec.width().map_err(|e| invalid(at("value"), e))?;
            Ok(NamedFilter {
                label: f.label.clone().unwrap_or_else(|| format!("{field}[{i}]")),
                spec,
            })
        })
        .collect()
}

impl RawSpectral {
    fn resolve(&self) -> Result<Spectral, ConfigError> {
        match (&self.preset, &self.heralded, &self.coherent) {
            (Some(Preset::Default), None, None) => {
                let center = match self.waveguide_center {
                    Some(q) => q.meters("spectral.waveguide_center")?,
                    None => telecom::VISIBLE_WAVELENGTH,
                };
                if center.is_nan() || center <= 0.0 {
                    return Err(invalid("spectral.waveguide_center", "must be positive"));
                }
                Spectral::default_model(center)
            }
            (None, Some(h), Some(c)) => {
                if self.waveguide_center.is_some() {
                    return Err(invalid(
                        "spectral.waveguide_center",
                        "only used with the default preset",
                    ));
                }
                let heralded = resolve_filters(h, "spectral.heralded")?;
                let coherent = resolve_filters(c, "spectral.coherent")?;
                let width = |fs: &[NamedFilter], field| {
                    let specs: Vec<FilterSpec> = fs.iter().map(|f| f.spec).collect();
                    hom_core::spectral::cascade_filters(&specs).map_err(|e| invalid(field, e))
                };
                Ok(Spectral {
                    model: "custom".into(),
                    heralded_width: width(&heralded, "spectral.heralded")?,
                    coherent_width: width(&coherent, "spectral.coherent")?,
                    heralded,
                    coherent,
                })
            }
            _ => Err(invalid(
                "spectral",
                "give either `preset` or both `heralded` and `coherent` filter lists",
            )),
        }
    }
}

impl RawConfig {
    fn resolve(self) -> Result<RunConfig, ConfigError> {
        let spectral = self
            .spectral
            .as_ref()
            .map(RawSpectral::resolve)
            .transpose()?;
        let overlap = match (self.v0, &spectral) {
            (Some(v0), Some(s)) => ModeOverlap::Pinned {
                v0,
                heralded: s.heralded_width,
                coherent: s.coherent_width,
            },
            (None, Some(s)) => ModeOverlap::Spectral {
                heralded: s.heralded_width,
                coherent: s.coherent_width,
            },
            (Some(v0), None) => ModeOverlap::Fixed { v0 },
            (None, None) => return Err(invalid("v0", "give `v0`, `spectral`, or both")),
        };
        let params = ExperimentParams {
            transmittance: self.transmittance,
            dark_prob: self.dark_prob,
            mean_photon_number: self.mean_photon_number,
            overlap,
            source_pair: match self.source_pair {
                RawSourcePair::SingleVsCoherent => SourcePair::SingleVsCoherent,
                RawSourcePair::SingleVsSingle => SourcePair::SingleVsSingle,
                RawSourcePair::CoherentVsCoherentPhaseAveraged => {
                    SourcePair::CoherentVsCoherentPhaseAveraged
                }
            },
            cutoff: self.cutoff,
        };
        params.validate().map_err(|e| match e {
            hom_core::experiment::ExperimentError::Parameter { name, .. } => invalid(name, e),
            other => invalid(".", other),
        })?;

        let grid = &self.delay_grid;
        if grid.steps < 3 {
            return Err(invalid(
                "delay_grid.steps",
                format!("need at least 3 steps, got {}", grid.steps),
            ));
        }
        let start = grid.start.delay(self.stage_convention);
        let stop = grid.stop.delay(self.stage_convention);
        if !(start.is_finite() && stop.is_finite() && stop > start) {
            return Err(invalid(
                "delay_grid",
                format!("stop ({stop:e} s) must exceed start ({start:e} s)"),
            ));
        }
        let delays = (0..grid.steps)
            .map(|i| start + (stop - start) * i as f64 / (grid.steps - 1) as f64)
            .collect();

        Ok(RunConfig {
            params,
            spectral,
            delays,
            stage_convention: self.stage_convention,
            seed: self.seed,
            format: self.format,
            output: self.output,
        })
    }
}
