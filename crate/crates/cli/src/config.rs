//! Scenario files.
//!
//! A scenario is a TOML document. Lengths (array length and radius, ULA
//! spacing, locations, regions, domains) share the unit of
//! `physical.wavelength` and are converted to wavelengths on ingestion. UCA
//! spacing and half-aperture are angles in radians. Unknown keys are
//! rejected.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use nfalias::afr::DomainShape;
use nfalias::ambiguity::{QuadratureStep, Region};
use nfalias::{sample_grid, Alignment, ParametricCurve, ParametricGrid, PhysicalConfig, Vec2};
use serde::{Deserialize, Serialize};

use crate::CliError;

/// Only schema version understood by this build.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub schema_version: u32,
    #[serde(default)]
    pub physical: PhysicalSection,
    pub array: ArraySection,
    /// True location `x`.
    pub source: Option<[f64; 2]>,
    /// Tested locations `x̃` for `spectrum` and `bandlimit`.
    #[serde(default)]
    pub tested: Vec<[f64; 2]>,
    pub region: Option<RegionSection>,
    pub spectrum: Option<SpectrumSection>,
    pub afr: Option<AfrSection>,
    pub eye: Option<EyeSection>,
    pub asod: Option<AsodSection>,
    #[serde(default)]
    pub tolerances: Tolerances,
    pub output_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct PhysicalSection {
    pub wavelength: f64,
    pub carrier_frequency_hz: Option<f64>,
}

impl Default for PhysicalSection {
    fn default() -> Self {
        Self {
            wavelength: 1.0,
            carrier_frequency_hz: None,
        }
    }
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ArraySection {
    Ula {
        length: f64,
        spacing: f64,
        #[serde(default)]
        center: [f64; 2],
        /// Radians from the x-axis.
        #[serde(default)]
        orientation: f64,
        #[serde(default)]
        alignment: Alignment,
    },
    Uca {
        radius: f64,
        /// Angular spacing in radians.
        spacing: f64,
        #[serde(default = "full_circle")]
        half_aperture: f64,
        #[serde(default)]
        alignment: Alignment,
    },
}

fn full_circle() -> f64 {
    PI
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct RegionSection {
    pub x: [f64; 2],
    pub y: [f64; 2],
    pub resolution: [usize; 2],
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumSection {
    /// Half-width of the frequency window in units of `2π/Δ`.
    #[serde(default = "default_span")]
    pub span: f64,
    #[serde(default = "default_samples")]
    pub samples: usize,
}

fn default_span() -> f64 {
    1.5
}

fn default_samples() -> usize {
    2001
}

impl Default for SpectrumSection {
    fn default() -> Self {
        Self {
            span: default_span(),
            samples: default_samples(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BandLimitSource {
    #[default]
    ClosedForm,
    Numeric,
}

#[derive(Debug, Clone, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct AfrSection {
    #[serde(default)]
    pub method: BandLimitSource,
    /// Closed-form ULA band limit of the infinite instead of the finite
    /// array.
    #[serde(default)]
    pub infinite: bool,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct EyeSection {
    /// `Δ/λ_c`; defaults to the array's spacing ratio.
    pub delta: Option<f64>,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(tag = "shape", rename_all = "snake_case", deny_unknown_fields)]
pub enum DomainSection {
    Point { at: [f64; 2] },
    Disc { center: [f64; 2], radius: f64 },
    Rectangle { min: [f64; 2], max: [f64; 2] },
    Polygon { vertices: Vec<[f64; 2]> },
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct AsodSection {
    pub domain: DomainSection,
    #[serde(default)]
    pub sample_spacing: f64,
    #[serde(default)]
    pub method: BandLimitSource,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    #[serde(default)]
    pub quadrature: QuadratureStep,
    /// `|A_S − A|` above which a node counts as visibly aliased.
    #[serde(default = "default_threshold")]
    pub af_threshold: f64,
    /// Relative magnitude `|G(ω)| > ε·max|G|` defining the strict band
    /// limit reported by `spectrum`.
    #[serde(default = "default_epsilon")]
    pub band_epsilon: f64,
}

fn default_threshold() -> f64 {
    5e-2
}

fn default_epsilon() -> f64 {
    1e-3
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            quadrature: QuadratureStep::default(),
            af_threshold: default_threshold(),
            band_epsilon: default_epsilon(),
        }
    }
}

/// A validated scenario in normalized units.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub raw: ScenarioConfig,
    /// SHA-256 of the config file bytes.
    pub sha256: String,
    pub phys: PhysicalConfig,
    /// Config length unit per wavelength.
    pub wavelength: f64,
    pub curve: ParametricCurve,
    pub grid: ParametricGrid,
    pub source: Option<Vec2>,
    pub tested: Vec<Vec2>,
    pub region: Option<Region>,
    pub domain: Option<(DomainShape, f64)>,
}

fn invalid(key: &str, msg: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("`{key}`: {msg}"))
}

fn positive(key: &str, v: f64) -> Result<f64, CliError> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(invalid(
            key,
            format!("must be positive and finite, got {v}"),
        ))
    }
}

impl Scenario {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let bytes = std::fs::read(path)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let text = std::str::from_utf8(&bytes)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let raw: ScenarioConfig = toml::from_str(text)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Self::from_config(raw, &bytes)
    }

    pub fn from_config(raw: ScenarioConfig, bytes: &[u8]) -> Result<Self, CliError> {
        use sha2::{Digest, Sha256};

        if raw.schema_version != SCHEMA_VERSION {
            return Err(invalid(
                "schema_version",
                format!("expected {SCHEMA_VERSION}, got {}", raw.schema_version),
            ));
        }
        let wavelength = positive("physical.wavelength", raw.physical.wavelength)?;
        let mut phys = PhysicalConfig::normalized();
        if let Some(hz) = raw.physical.carrier_frequency_hz {
            phys = phys.with_carrier_frequency(positive("physical.carrier_frequency_hz", hz)?);
        }
        let scale = |p: [f64; 2]| Vec2::new(p[0] / wavelength, p[1] / wavelength);

        let (curve, spacing, alignment) = match &raw.array {
            ArraySection::Ula {
                length,
                spacing,
                center,
                orientation,
                alignment,
            } => {
                let length = positive("array.length", *length)? / wavelength;
                let curve = ParametricCurve::ula_with(length, scale(*center), *orientation)
                    .map_err(|e| invalid("array", e))?;
                (
                    curve,
                    positive("array.spacing", *spacing)? / wavelength,
                    *alignment,
                )
            }
            ArraySection::Uca {
                radius,
                spacing,
                half_aperture,
                alignment,
            } => {
                let radius = positive("array.radius", *radius)? / wavelength;
                let curve = ParametricCurve::uca_arc(radius, *half_aperture)
                    .map_err(|e| invalid("array", e))?;
                (curve, positive("array.spacing", *spacing)?, *alignment)
            }
        };
        let grid =
            sample_grid(&curve, spacing, alignment).map_err(|e| invalid("array.spacing", e))?;

        let finite = |key: &str, p: [f64; 2]| {
            if p.iter().all(|v| v.is_finite()) {
                Ok(scale(p))
            } else {
                Err(invalid(key, "coordinates must be finite"))
            }
        };
        let source = raw.source.map(|p| finite("source", p)).transpose()?;
        let tested = raw
            .tested
            .iter()
            .map(|&p| finite("tested", p))
            .collect::<Result<Vec<_>, _>>()?;

        let region = raw
            .region
            .as_ref()
            .map(|r| {
                let [x0, x1] = r.x.map(|v| v / wavelength);
                let [y0, y1] = r.y.map(|v| v / wavelength);
                Region::new((x0, x1), (y0, y1), r.resolution[0], r.resolution[1])
                    .map_err(|e| invalid("region", e))
            })
            .transpose()?;

        let domain = raw.asod.as_ref().map(|a| {
            let shape = match &a.domain {
                DomainSection::Point { at } => DomainShape::Point { at: scale(*at) },
                DomainSection::Disc { center, radius } => DomainShape::Disc {
                    center: scale(*center),
                    radius: radius / wavelength,
                },
                DomainSection::Rectangle { min, max } => DomainShape::Rectangle {
                    min: scale(*min),
                    max: scale(*max),
                },
                DomainSection::Polygon { vertices } => DomainShape::Polygon {
                    vertices: vertices.iter().map(|&v| scale(v)).collect(),
                },
            };
            (shape, a.sample_spacing / wavelength)
        });

        if let Some(s) = &raw.spectrum {
            positive("spectrum.span", s.span)?;
            if s.samples < 2 {
                return Err(invalid("spectrum.samples", "need at least 2"));
            }
        }
        let eps = raw.tolerances.band_epsilon;
        if !(eps > 0.0 && eps < 1.0) {
            return Err(invalid(
                "tolerances.band_epsilon",
                format!("must lie in (0, 1), got {eps}"),
            ));
        }
        positive("tolerances.af_threshold", raw.tolerances.af_threshold)?;
        if let QuadratureStep::Fixed(h) = raw.tolerances.quadrature {
            positive("tolerances.quadrature.value", h)?;
        }

        Ok(Self {
            sha256: hex::encode(Sha256::digest(bytes)),
            raw,
            phys,
            wavelength,
            curve,
            grid,
            source,
            tested,
            region,
            domain,
        })
    }

    pub fn source(&self) -> Result<Vec2, CliError> {
        self.source
            .ok_or_else(|| invalid("source", "required by this command"))
    }

    pub fn region(&self) -> Result<Region, CliError> {
        self.region
            .ok_or_else(|| invalid("region", "required by this command"))
    }

    pub fn tested(&self) -> Result<&[Vec2], CliError> {
        if self.tested.is_empty() {
            Err(invalid(
                "tested",
                "at least one location required by this command",
            ))
        } else {
            Ok(&self.tested)
        }
    }

    pub fn spacing(&self) -> f64 {
        self.grid.spacing()
    }
}
