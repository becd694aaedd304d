//! Output documents and their serialization.

use std::io::Write;
use std::path::Path;

use serde::ser::Error as _;
use serde::{Serialize, Serializer};
use serde_json::value::RawValue;

use hom_core::experiment::{DipFit, ExperimentParams, ModeOverlap};
use hom_core::spectral::FilterSpec;

use crate::config::{RunConfig, Spectral};

/// A float written with 17 significant digits, or `null` if not finite.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Num(pub f64);

impl Num {
    pub fn text(self) -> String {
        if self.0.is_finite() {
            format!("{:.16e}", self.0)
        } else {
            String::new()
        }
    }
}

impl Serialize for Num {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        if !self.0.is_finite() {
            return serializer.serialize_none();
        }
        RawValue::from_string(self.text())
            .map_err(S::Error::custom)?
            .serialize(serializer)
    }
}

#[derive(Serialize)]
pub struct Report<D: Serialize> {
    pub command: &'static str,
    pub inputs: Inputs,
    pub derived: D,
    pub curve: Option<Curve>,
    pub fit: Option<Fit>,
}

#[derive(Serialize)]
pub struct Inputs {
    pub transmittance: Num,
    pub dark_prob: Num,
    pub mean_photon_number: Num,
    pub source_pair: &'static str,
    pub overlap: OverlapInputs,
    pub spectral: Option<SpectralInputs>,
    pub cutoff: usize,
    pub delay_grid: GridInputs,
    pub method: Option<&'static str>,
}

#[derive(Serialize)]
pub struct OverlapInputs {
    /// `fixed`, `spectral` or `pinned`.
    pub kind: &'static str,
    pub v0: Num,
}

#[derive(Serialize)]
pub struct SpectralInputs {
    pub model: String,
    pub heralded: Vec<FilterOut>,
    pub coherent: Vec<FilterOut>,
}

#[derive(Serialize)]
pub struct FilterOut {
    pub label: String,
    pub kind: &'static str,
    pub fwhm: Num,
    pub center_m: Option<Num>,
}

#[derive(Serialize)]
pub struct GridInputs {
    pub start_s: Num,
    pub stop_s: Num,
    pub steps: usize,
    pub stage_convention: &'static str,
}

impl Inputs {
    pub fn new(config: &RunConfig, method: Option<&'static str>) -> Self {
        let p: &ExperimentParams = &config.params;
        let kind = match p.overlap {
            ModeOverlap::Fixed { .. } => "fixed",
            ModeOverlap::Spectral { .. } => "spectral",
            ModeOverlap::Pinned { .. } => "pinned",
        };
        Self {
            transmittance: Num(p.transmittance),
            dark_prob: Num(p.dark_prob),
            mean_photon_number: Num(p.mean_photon_number),
            source_pair: p.source_pair.name(),
            overlap: OverlapInputs {
                kind,
                v0: Num(p.overlap.peak()),
            },
            spectral: config.spectral.as_ref().map(spectral_inputs),
            cutoff: p.cutoff,
            delay_grid: GridInputs {
                start_s: Num(config.delays[0]),
                stop_s: Num(config.delays[config.delays.len() - 1]),
                steps: config.delays.len(),
                stage_convention: config.stage_convention.name(),
            },
            method,
        }
    }
}

fn spectral_inputs(s: &Spectral) -> SpectralInputs {
    let filters = |list: &[crate::config::NamedFilter]| {
        list.iter()
            .map(|f| match f.spec {
                FilterSpec::TimeFwhm { fwhm } => FilterOut {
                    label: f.label.clone(),
                    kind: "time_fwhm",
                    fwhm: Num(fwhm),
                    center_m: None,
                },
                FilterSpec::WavelengthFwhm { fwhm, center } => FilterOut {
                    label: f.label.clone(),
                    kind: "wavelength_fwhm",
                    fwhm: Num(fwhm),
                    center_m: Some(Num(center)),
                },
            })
            .collect()
    };
    SpectralInputs {
        model: s.model.clone(),
        heralded: filters(&s.heralded),
        coherent: filters(&s.coherent),
    }
}

#[derive(Serialize)]
pub struct Curve {
    pub delay_s: Vec<Num>,
    pub p_exact: Vec<Num>,
    /// `null` entries where no closed form exists.
    pub p_closed_ratio: Vec<Num>,
}

impl Curve {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("delay_s,p_exact,p_closed_ratio\n");
        for i in 0..self.delay_s.len() {
            out.push_str(&format!(
                "{},{},{}\n",
                self.delay_s[i].text(),
                self.p_exact[i].text(),
                self.p_closed_ratio[i].text()
            ));
        }
        out
    }
}

#[derive(Serialize)]
pub struct Fit {
    /// Which curve was fitted: `exact` or `closed`.
    pub curve: &'static str,
    pub visibility: Num,
    pub fwhm_s: Num,
    pub center_s: Num,
    pub baseline: Num,
    pub rms_residual: Num,
    pub iterations: usize,
    pub warning: Option<String>,
}

impl Fit {
    pub fn new(curve: &'static str, fit: &DipFit) -> Self {
        Self {
            curve,
            visibility: Num(fit.visibility),
            fwhm_s: Num(fit.fwhm),
            center_s: Num(fit.center),
            baseline: Num(fit.baseline),
            rms_residual: Num(fit.rms_residual),
            iterations: fit.iterations,
            warning: fit.warning.clone(),
        }
    }
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report serializes");
    s.push('\n');
    s
}

/// Writes `contents` next to `path` and renames it into place, so readers
/// never see a partial file.
pub fn write_atomic(path: &Path, contents: &str) -> std::io::Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents.as_bytes())?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits() {
        assert_eq!(Num(0.1).text(), "1.0000000000000001e-1");
        assert_eq!(Num(-0.375).text(), "-3.7500000000000000e-1");
        assert_eq!(Num(f64::NAN).text(), "");
        let json = serde_json::to_string(&vec![Num(1.0), Num(f64::INFINITY)]).unwrap();
        assert_eq!(json, "[1.0000000000000000e0,null]");
    }

    #[test]
    fn round_trip_is_exact() {
        for x in [0.719_746_559_571_64, 1e-300, 5.303e-8, -0.0] {
            let back: f64 = Num(x).text().parse().unwrap();
            assert_eq!(back.to_bits(), x.to_bits());
        }
    }

    #[test]
    fn atomic_write_replaces() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("out.json");
        write_atomic(&path, "a").unwrap();
        write_atomic(&path, "b").unwrap();
        assert_eq!(std::fs::read_to_string(&path).unwrap(), "b");
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
    }
}
