//! JSON configuration schema for evolution runs.
//!
//! Anisotropies, mobilities and curves are tagged objects of the form
//! `{"kind": "...", "params": {...}}`; `params` may be omitted for kinds
//! without parameters. See `configs/` in the repository root for one example
//! per benchmark experiment.

use std::path::PathBuf;

use serde::Deserialize;

use aniflow_core::anisotropy::{Anisotropy, Mobility};
use aniflow_core::assembly::MassTreatment;
use aniflow_core::presets::CurvePreset;
use aniflow_core::solver::NewtonOptions;

use crate::CliError;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlowConfig {
    pub anisotropy: AnisotropySpec,
    pub mobility: MobilitySpec,
    pub curve: CurveSpec,
    #[serde(rename = "J")]
    pub elements: usize,
    pub dt: f64,
    #[serde(rename = "T")]
    pub t_end: f64,
    #[serde(default)]
    pub mass_treatment: MassSpec,
    #[serde(default)]
    pub newton: Option<NewtonSpec>,
    #[serde(default)]
    pub init: InitSpec,
    #[serde(default)]
    pub forcing: Option<ForcingSpec>,
    pub outputs: OutputSpec,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "snake_case", deny_unknown_fields)]
pub enum AnisotropySpec {
    Isotropic { dim: usize },
    DiagonalQuadratic { coeffs: Vec<f64> },
    #[serde(rename = "sin_modulated_2d")]
    SinModulated2d { k: u32, delta: f64 },
    RegularizedL1 { delta: f64, dim: usize },
}

impl AnisotropySpec {
    pub fn build(&self) -> Result<Anisotropy, CliError> {
        let a = match self {
            AnisotropySpec::Isotropic { dim } => Anisotropy::isotropic(*dim),
            AnisotropySpec::DiagonalQuadratic { coeffs } => {
                Anisotropy::diagonal_quadratic(coeffs.clone())
            }
            AnisotropySpec::SinModulated2d { k, delta } => Anisotropy::sin_modulated_2d(*k, *delta),
            AnisotropySpec::RegularizedL1 { delta, dim } => Anisotropy::regularized_l1(*delta, *dim),
        };
        a.map_err(|e| CliError::Config(format!("anisotropy: {e}")))
    }
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MobilitySpec {
    ConstantOne,
    InversePhi,
}

impl MobilitySpec {
    pub fn build(&self) -> Mobility {
        match self {
            MobilitySpec::ConstantOne => Mobility::ConstantOne,
            MobilitySpec::InversePhi => Mobility::InversePhi,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "snake_case", deny_unknown_fields)]
pub enum CurveSpec {
    Circle { r: f64 },
    #[serde(rename = "ellipse_2d")]
    Ellipse2d { a: f64, b: f64 },
    #[serde(rename = "ellipse_3d_selfsimilar")]
    Ellipse3dSelfsimilar { delta: f64 },
    Trefoil,
    InterlockedRings,
    ClosedHelix,
    ArchimedeanSpiral { r_inner: f64, r_outer: f64, windings: f64 },
    /// Node list read back from a frame CSV.
    FromFile { path: PathBuf },
}

impl CurveSpec {
    /// Build the preset; `FromFile` is handled by the caller (it needs IO).
    pub fn build_preset(&self) -> Result<Option<CurvePreset>, CliError> {
        let p = match self {
            CurveSpec::Circle { r } => CurvePreset::circle(*r),
            CurveSpec::Ellipse2d { a, b } => CurvePreset::ellipse_2d(*a, *b),
            CurveSpec::Ellipse3dSelfsimilar { delta } => {
                CurvePreset::self_similar_ellipse_3d(*delta)
            }
            CurveSpec::Trefoil => Ok(CurvePreset::trefoil()),
            CurveSpec::InterlockedRings => Ok(CurvePreset::interlocked_rings()),
            CurveSpec::ClosedHelix => Ok(CurvePreset::closed_helix()),
            CurveSpec::ArchimedeanSpiral { r_inner, r_outer, windings } => {
                CurvePreset::archimedean_spiral(*r_inner, *r_outer, *windings)
            }
            CurveSpec::FromFile { .. } => return Ok(None),
        };
        p.map(Some).map_err(|e| CliError::Config(format!("curve: {e}")))
    }
}

#[derive(Debug, Clone, Copy, Default, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MassSpec {
    #[default]
    Consistent,
    Lumped,
}

impl MassSpec {
    pub fn build(&self) -> MassTreatment {
        match self {
            MassSpec::Consistent => MassTreatment::Consistent,
            MassSpec::Lumped => MassTreatment::Lumped,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NewtonSpec {
    pub tol_residual: Option<f64>,
    pub tol_step: Option<f64>,
    pub max_iter: Option<usize>,
}

impl NewtonSpec {
    pub fn build(&self, grid: aniflow_core::mesh::PeriodicGrid) -> NewtonOptions {
        let mut n = NewtonOptions::default_for(grid);
        if let Some(v) = self.tol_residual {
            n.tol_residual = v;
        }
        if let Some(v) = self.tol_step {
            n.tol_step = v;
        }
        if let Some(v) = self.max_iter {
            n.max_iter = v;
        }
        n
    }
}

#[derive(Debug, Clone, Copy, Default, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum InitSpec {
    /// Ritz projection of the preset curve (falls back to interpolation for
    /// the piecewise-linear presets, which have corners).
    #[default]
    Ritz,
    Interpolate,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ForcingSpec {
    /// Name of the manufactured exact solution: `ellipse3d` or `circle`.
    pub manufactured: String,
    #[serde(default)]
    pub delta: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    pub series_path: PathBuf,
    #[serde(default)]
    pub frames_dir: Option<PathBuf>,
    #[serde(default)]
    pub frames_every: usize,
    /// Also write legacy-VTK polylines next to the frame CSVs (useful for 3d
    /// viewers).
    #[serde(default)]
    pub vtk: bool,
}

impl FlowConfig {
    /// Structural checks beyond what serde enforces.
    pub fn validate(&self) -> Result<(), CliError> {
        if self.elements < 3 {
            return Err(CliError::Config(String::from("J must be at least 3")));
        }
        if !(self.dt > 0.0) {
            return Err(CliError::Config(String::from("dt must be positive")));
        }
        if self.t_end < 0.0 {
            return Err(CliError::Config(String::from("T must be nonnegative")));
        }
        let ratio = self.t_end / self.dt;
        if (ratio - ratio.round()).abs() > 1e-9 * ratio.max(1.0) {
            return Err(CliError::Config(String::from(
                "T must be an integer multiple of dt",
            )));
        }
        if self.outputs.frames_every > 0 && self.outputs.frames_dir.is_none() {
            return Err(CliError::Config(String::from(
                "outputs.frames_every > 0 requires outputs.frames_dir",
            )));
        }
        Ok(())
    }
}

/// Parse a JSON config, reporting the path of the offending key on error.
pub fn parse_flow_config(text: &str) -> Result<FlowConfig, CliError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let cfg: FlowConfig = serde_path_to_error::deserialize(de)
        .map_err(|e| CliError::Config(format!("{} (at {})", e.inner(), e.path())))?;
    cfg.validate()?;
    Ok(cfg)
}

/// Standalone anisotropy description for `aniflow validate`.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ValidateConfig {
    #[serde(flatten)]
    pub anisotropy: AnisotropySpec,
    #[serde(default)]
    pub samples: Option<usize>,
}

pub fn parse_validate_config(text: &str) -> Result<ValidateConfig, CliError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de)
        .map_err(|e| CliError::Config(format!("{} (at {})", e.inner(), e.path())))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_a_full_config() {
        let text = r#"{
            "anisotropy": {"kind": "diagonal_quadratic", "params": {"coeffs": [1.0, 0.25, 0.25]}},
            "mobility": {"kind": "constant_one"},
            "curve": {"kind": "trefoil"},
            "J": 512, "dt": 1e-4, "T": 2.45,
            "mass_treatment": "consistent",
            "init": "ritz",
            "outputs": {"series_path": "out/series.csv", "frames_dir": "out/frames", "frames_every": 1000}
        }"#;
        let cfg = parse_flow_config(text).unwrap();
        assert_eq!(cfg.elements, 512);
        assert!(cfg.anisotropy.build().is_ok());
        assert!(matches!(cfg.curve, CurveSpec::Trefoil));
    }

    #[test]
    fn error_names_the_offending_key() {
        let text = r#"{
            "anisotropy": {"kind": "diagonal_quadratic", "params": {"coeffs": "oops"}},
            "mobility": {"kind": "constant_one"},
            "curve": {"kind": "trefoil"},
            "J": 16, "dt": 1e-4, "T": 0.01,
            "outputs": {"series_path": "out/series.csv"}
        }"#;
        let err = parse_flow_config(text).unwrap_err();
        let msg = format!("{err}");
        assert!(msg.contains("coeffs"), "message should name the key: {msg}");
    }

    #[test]
    fn rejects_inconsistent_time_grid() {
        let text = r#"{
            "anisotropy": {"kind": "isotropic", "params": {"dim": 2}},
            "mobility": {"kind": "constant_one"},
            "curve": {"kind": "circle", "params": {"r": 1.0}},
            "J": 16, "dt": 3e-4, "T": 0.01,
            "outputs": {"series_path": "out/series.csv"}
        }"#;
        assert!(matches!(parse_flow_config(text), Err(CliError::Config(_))));
    }
}
