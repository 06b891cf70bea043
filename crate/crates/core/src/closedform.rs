//! Closed-form band limits for linear and circular arrays.
//!
//! ULA results are stated in the array frame: the array lies on the x-axis,
//! centered at the origin, and `ρ` is the abscissa. `x = [x, y]` is the
//! source and `x̃ = [x̃, ỹ]` the tested location. Both heights only enter
//! through their magnitude, so locations below the array are handled by
//! reflecting each of them onto the upper half-plane.
//!
//! UCA results assume the infinite-radius model: `K = k_c·R·Ω(θ)` in
//! radians per radian of arc, with `R = ‖x − x̃‖` and `θ = ∠(x − x̃)`.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{PhysicalConfig, Vec2};
use crate::spectral::Regime;

/// `|u − 1|` below which the horizontally-aligned limit is used.
pub const U_SINGULAR_TOL: f64 = 1e-9;

/// `max(‖x‖, ‖x̃‖)/R_uca` above which the infinite-radius model is flagged.
pub const UCA_VALIDITY_THRESHOLD: f64 = 0.01;

fn sign(v: f64) -> f64 {
    if v < 0.0 {
        -1.0
    } else {
        1.0
    }
}

/// Reduced coordinates `u = (ỹ/y)^{2/3}`, `v = (x̃ − x)/y`, `w = v/(u² − 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UlaReducedCoords {
    pub u: f64,
    pub v: f64,
    /// `None` when `|u − 1| ≤` [`U_SINGULAR_TOL`].
    pub w: Option<f64>,
}

/// Reduced coordinates of the pair in the array frame.
pub fn reduced_coords(tested: Vec2, source: Vec2) -> Result<UlaReducedCoords> {
    let (y, yt) = (source.y.abs(), tested.y.abs());
    if !(y > 0.0 && yt > 0.0) || !tested.is_finite() || !source.is_finite() {
        return Err(Error::Domain(format!(
            "locations must lie off the array line, got heights {} and {}",
            source.y, tested.y
        )));
    }
    let u = (yt / y).cbrt().powi(2);
    let v = (tested.x - source.x) / y;
    let w = ((u - 1.0).abs() > U_SINGULAR_TOL).then(|| v / ((u - 1.0) * (u + 1.0)));
    Ok(UlaReducedCoords { u, v, w })
}

/// ULA band limit with the quantities that produced it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UlaBandLimit {
    #[serde(rename = "K")]
    pub k: f64,
    /// Normalized maximizer: the infinite array peaks at `ρ = y·β + x`.
    pub beta: f64,
    /// Secondary stationary point, when `w` is defined.
    pub beta_s: Option<f64>,
    /// `None` for the infinite array.
    pub regime: Option<Regime>,
    /// `|B₊₁|` and `|B₋₁|`, local frequencies at the array edges
    /// `±sign(w)·L/2`.
    pub b_plus: Option<f64>,
    pub b_minus: Option<f64>,
    /// Local frequency magnitude at the secondary stationary point.
    pub k_s: Option<f64>,
    /// Parametric location attaining `K`.
    pub rho_bar: f64,
    /// The pair sits at equal heights, so `w` (and `β^s`) is undefined and
    /// `sign(v)` stands in for `sign(w)`.
    pub u_singular: bool,
}

fn k_at(beta: f64, c: &UlaReducedCoords, k: f64) -> f64 {
    k * ((c.u - 1.0) * beta + c.v).abs() / (c.u * beta.hypot(1.0))
}

/// Primary and secondary stationary points `(β, β^s)`.
fn stationary_points(c: &UlaReducedCoords) -> (f64, Option<f64>) {
    match c.w {
        None => (0.5 * c.v, None),
        Some(w) => {
            let s = sign(w);
            let root = c.u * (1.0 / (c.u + 1.0) + w * w).sqrt();
            // rationalized s·root − w; numerator and denominator carry no
            // cancellation
            let beta = (c.u * c.u / (c.u + 1.0) + c.v * w) / (s * root + w);
            (beta, Some(-(s * root + w)))
        }
    }
}

/// Band limit of the infinite ULA.
pub fn k_inf_ula(tested: Vec2, source: Vec2, phys: &PhysicalConfig) -> Result<UlaBandLimit> {
    let c = reduced_coords(tested, source)?;
    let k = phys.wavenumber();
    let (beta, beta_s) = stationary_points(&c);
    let value = match c.w {
        None => k * c.v.abs() / (0.25 * c.v * c.v + 1.0).sqrt(),
        Some(_) if c.v == 0.0 => k * (c.u - 1.0).abs() / (1.0 + c.u + c.u * c.u).sqrt(),
        Some(_) => k_at(beta, &c, k),
    };
    Ok(UlaBandLimit {
        k: value,
        beta,
        beta_s,
        regime: None,
        b_plus: None,
        b_minus: None,
        k_s: beta_s.map(|b| k_at(b, &c, k)),
        rho_bar: source.y.abs() * beta + source.x,
        u_singular: c.w.is_none(),
    })
}

/// Local frequency `k_c[cos θ(x̃) − cos θ(x)]` at the array abscissa `edge`.
fn edge_frequency(tested: Vec2, source: Vec2, edge: f64, k: f64) -> f64 {
    let cos_angle = |p: Vec2| {
        let d = Vec2::new(p.x - edge, p.y.abs());
        d.x / d.norm()
    };
    k * (cos_angle(tested) - cos_angle(source))
}

/// Band limit of the ULA `[−L/2, L/2]`.
pub fn k_finite_ula(
    length: f64,
    tested: Vec2,
    source: Vec2,
    phys: &PhysicalConfig,
) -> Result<UlaBandLimit> {
    if !(length > 0.0 && length.is_finite()) {
        return Err(Error::Parameter(format!(
            "array length must be positive, got {length}"
        )));
    }
    let c = reduced_coords(tested, source)?;
    let inf = k_inf_ula(tested, source, phys)?;
    let k = phys.wavenumber();
    let y = source.y.abs();
    let half = 0.5 * length;
    let s = sign(c.w.unwrap_or(c.v));
    let plus_edge = s * half;
    let b_plus = edge_frequency(tested, source, plus_edge, k).abs();
    let b_minus = edge_frequency(tested, source, -plus_edge, k).abs();

    let primary = y * inf.beta + source.x;
    let mut out = UlaBandLimit {
        b_plus: Some(b_plus),
        b_minus: Some(b_minus),
        ..inf
    };
    if primary.abs() <= half {
        out.regime = Some(Regime::Interior);
        out.rho_bar = primary;
        return Ok(out);
    }
    if let (Some(beta_s), Some(k_s)) = (inf.beta_s, inf.k_s) {
        let secondary = y * beta_s + source.x;
        if secondary.abs() <= half {
            out.regime = Some(Regime::Secondary);
            (out.k, out.rho_bar) = if b_plus >= k_s {
                (b_plus, plus_edge)
            } else {
                (k_s, secondary)
            };
            return Ok(out);
        }
    }
    out.regime = Some(Regime::Edge);
    (out.k, out.rho_bar) = if b_plus >= b_minus {
        (b_plus, plus_edge)
    } else {
        (b_minus, -plus_edge)
    };
    Ok(out)
}

/// Shape of the normalized AFR `𝒰` of the infinite ULA for the source
/// `[0, 1]`, as a function of `δ = Δ/λ_c`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EyeGeometry {
    pub delta: f64,
    /// Half-width: the eye crosses the line `ỹ = 1` at `x̃ = ±width`.
    pub width: f64,
    /// Top of the eye on the axis `x̃ = 0`.
    pub h_plus: f64,
    /// Bottom of the eye on the axis `x̃ = 0`.
    pub h_minus: f64,
    /// `1/2 < δ ≤ 1`: the eye opens vertically (`h₊ = ∞`, `h₋ = 0`).
    pub degenerate: bool,
    /// `δ ≤ 1/2`: the whole plane is aliasing free.
    pub unbounded: bool,
}

/// Eye dimensions for the spacing-to-wavelength ratio `δ`.
pub fn eye_geometry(delta: f64) -> Result<EyeGeometry> {
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::Parameter(format!(
            "spacing ratio must be positive, got {delta}"
        )));
    }
    let d2 = delta * delta;
    if delta <= 0.5 {
        return Ok(EyeGeometry {
            delta,
            width: f64::INFINITY,
            h_plus: f64::INFINITY,
            h_minus: 0.0,
            degenerate: false,
            unbounded: true,
        });
    }
    let width = 2.0 / (4.0 * d2 - 1.0).sqrt();
    if delta <= 1.0 {
        return Ok(EyeGeometry {
            delta,
            width,
            h_plus: f64::INFINITY,
            h_minus: 0.0,
            degenerate: true,
            unbounded: false,
        });
    }
    let disc = (12.0 * d2 - 3.0).sqrt();
    let den = 2.0 * (d2 - 1.0);
    Ok(EyeGeometry {
        delta,
        width,
        h_plus: ((2.0 * d2 + 1.0 + disc) / den).powf(1.5),
        h_minus: ((2.0 * d2 + 1.0 - disc) / den).powf(1.5),
        degenerate: false,
        unbounded: false,
    })
}

/// Similarity mapping the normalized eye onto the AFR of a given source:
/// `S_∞(x) = scale·𝒰 + shift`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EyeTransform {
    pub scale: f64,
    pub shift: Vec2,
    pub eye: EyeGeometry,
}

impl EyeTransform {
    pub fn to_afr(&self, eye_point: Vec2) -> Vec2 {
        eye_point * self.scale + self.shift
    }

    pub fn to_eye(&self, afr_point: Vec2) -> Vec2 {
        (afr_point - self.shift) * (1.0 / self.scale)
    }
}

/// Transform from the normalized eye to the infinite-ULA AFR of `source`
/// (array frame) at spacing `spacing`.
///
/// A source below the array gets a negative scale, which by the x-symmetry
/// of the eye is the reflection across the array.
pub fn afr_ula_from_eye(source: Vec2, spacing: f64, phys: &PhysicalConfig) -> Result<EyeTransform> {
    if source.y == 0.0 || !source.is_finite() {
        return Err(Error::Domain(format!(
            "source must lie off the array line, got ({}, {})",
            source.x, source.y
        )));
    }
    Ok(EyeTransform {
        scale: source.y,
        shift: Vec2::new(source.x, 0.0),
        eye: eye_geometry(spacing / phys.wavelength())?,
    })
}

/// Fraction `Ω(θ) ∈ [0, 1]` of the maximal chirp rate seen by an arc of
/// half-aperture `ψ` in direction `θ`.
pub fn visual_aperture(theta: f64, half_aperture: f64) -> Result<f64> {
    if !(half_aperture > 0.0 && half_aperture <= PI) {
        return Err(Error::Parameter(format!(
            "half-aperture must lie in (0, π], got {half_aperture}"
        )));
    }
    // distance from θ + π/2 to the nearest multiple of π
    let t = (theta + FRAC_PI_2 + FRAC_PI_2).rem_euclid(PI) - FRAC_PI_2;
    if t.abs() <= half_aperture {
        return Ok(1.0);
    }
    Ok((half_aperture + theta)
        .sin()
        .abs()
        .max((half_aperture - theta).sin().abs()))
}

/// Infinite-radius UCA band limit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UcaBandLimit {
    #[serde(rename = "K")]
    pub k: f64,
    pub visual_aperture: f64,
    /// `R = ‖x − x̃‖`.
    pub separation: f64,
    /// `θ = ∠(x − x̃)`.
    pub theta: f64,
    pub half_aperture: f64,
    /// `max(‖x‖, ‖x̃‖)/R_uca` when the physical radius is known.
    pub validity_ratio: Option<f64>,
}

impl UcaBandLimit {
    /// `false` when the locations are too far from the center for the
    /// infinite-radius model.
    pub fn is_valid(&self) -> bool {
        self.validity_ratio
            .is_none_or(|r| r <= UCA_VALIDITY_THRESHOLD)
    }
}

/// `K = k_c·R·Ω(θ)`, in radians per radian of arc.
pub fn k_uca(
    tested: Vec2,
    source: Vec2,
    half_aperture: f64,
    phys: &PhysicalConfig,
) -> Result<UcaBandLimit> {
    let d = source - tested;
    let theta = if d == Vec2::ZERO { 0.0 } else { d.angle() };
    let omega = visual_aperture(theta, half_aperture)?;
    let separation = d.norm();
    Ok(UcaBandLimit {
        k: phys.wavenumber() * separation * omega,
        visual_aperture: omega,
        separation,
        theta,
        half_aperture,
        validity_ratio: None,
    })
}

/// [`k_uca`] with the validity ratio for an array of radius `radius`.
pub fn k_uca_with_radius(
    tested: Vec2,
    source: Vec2,
    half_aperture: f64,
    radius: f64,
    phys: &PhysicalConfig,
) -> Result<UcaBandLimit> {
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::Parameter(format!(
            "radius must be positive, got {radius}"
        )));
    }
    let mut out = k_uca(tested, source, half_aperture, phys)?;
    out.validity_ratio = Some(tested.norm().max(source.norm()) / radius);
    Ok(out)
}

/// Polar description of the infinite-radius UCA AFR boundary around a
/// source.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UcaBoundary {
    pub center: Vec2,
    pub spacing: f64,
    pub theta: Vec<f64>,
    /// `λ_c/(Δ·Ω(θ))`; infinite where `Ω(θ) = 0`.
    pub radius: Vec<f64>,
}

impl UcaBoundary {
    /// Boundary points `x − R(θ)·[cos θ, sin θ]`, skipping infinite radii.
    pub fn points(&self) -> Vec<Option<Vec2>> {
        self.theta
            .iter()
            .zip(&self.radius)
            .map(|(&t, &r)| r.is_finite().then(|| self.center - Vec2::from_polar(r, t)))
            .collect()
    }
}

/// AFR boundary radius along each direction in `theta`.
pub fn afr_uca_boundary(
    source: Vec2,
    spacing: f64,
    half_aperture: f64,
    theta: &[f64],
    phys: &PhysicalConfig,
) -> Result<UcaBoundary> {
    if !(spacing > 0.0 && spacing.is_finite()) {
        return Err(Error::Parameter(format!(
            "angular spacing must be positive, got {spacing}"
        )));
    }
    let radius = theta
        .iter()
        .map(|&t| {
            let omega = visual_aperture(t, half_aperture)?;
            Ok(if omega == 0.0 {
                f64::INFINITY
            } else {
                phys.wavelength() / (spacing * omega)
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(UcaBoundary {
        center: source,
        spacing,
        theta: theta.to_vec(),
        radius,
    })
}
