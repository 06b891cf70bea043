//! Array topologies as parametric curves, their uniform sampling, and the
//! geometric helpers used by the band-limit bounds.
//!
//! Every array is a bijection `ν` from a scalar interval `[ρ_min, ρ_max]`
//! onto a planar curve. Antennas sit at the images of a uniform grid in
//! that interval, so a single spacing `Δ` describes linear arrays (length
//! units) and circular arcs (radians) alike.

use std::f64::consts::{PI, TAU};
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::optimize::golden_section_max;
use crate::quadrature::integrate_adaptive;

/// Planar point or vector.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn from_polar(radius: f64, angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Self::new(radius * c, radius * s)
    }

    #[inline]
    pub fn dot(self, other: Vec2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    #[inline]
    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    #[inline]
    pub fn norm_sq(self) -> f64 {
        self.dot(self)
    }

    /// Polar angle in `(-π, π]`.
    #[inline]
    pub fn angle(self) -> f64 {
        self.y.atan2(self.x)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn rotate(self, angle: f64) -> Vec2 {
        let (s, c) = angle.sin_cos();
        Vec2::new(c * self.x - s * self.y, s * self.x + c * self.y)
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    #[inline]
    fn add(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    #[inline]
    fn sub(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    #[inline]
    fn mul(self, s: f64) -> Vec2 {
        Vec2::new(self.x * s, self.y * s)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    #[inline]
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

impl From<[f64; 2]> for Vec2 {
    fn from(p: [f64; 2]) -> Self {
        Vec2::new(p[0], p[1])
    }
}

/// Carrier wavelength and the derived wavenumber.
///
/// All library routines work in whatever length unit `wavelength` is
/// expressed in; the CLI normalizes to `wavelength = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalConfig {
    wavelength: f64,
    /// Carrier frequency in Hz, metadata only.
    carrier_frequency_hz: Option<f64>,
}

impl PhysicalConfig {
    pub fn new(wavelength: f64) -> Result<Self> {
        if !(wavelength.is_finite() && wavelength > 0.0) {
            return Err(Error::Parameter(format!(
                "wavelength must be positive and finite, got {wavelength}"
            )));
        }
        Ok(Self {
            wavelength,
            carrier_frequency_hz: None,
        })
    }

    /// Unit wavelength: lengths are measured in multiples of `λ_c`.
    pub fn normalized() -> Self {
        Self {
            wavelength: 1.0,
            carrier_frequency_hz: None,
        }
    }

    pub fn with_carrier_frequency(mut self, hz: f64) -> Self {
        self.carrier_frequency_hz = Some(hz);
        self
    }

    pub fn wavelength(&self) -> f64 {
        self.wavelength
    }

    /// `k_c = 2π / λ_c`.
    pub fn wavenumber(&self) -> f64 {
        TAU / self.wavelength
    }

    pub fn carrier_frequency_hz(&self) -> Option<f64> {
        self.carrier_frequency_hz
    }
}

impl Default for PhysicalConfig {
    fn default() -> Self {
        Self::normalized()
    }
}

/// Straight array of length `length`, parameterized by signed arc length
/// from its center along `orientation` (radians from the x-axis).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Ula {
    length: f64,
    center: Vec2,
    orientation: f64,
}

impl Ula {
    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn center(&self) -> Vec2 {
        self.center
    }

    pub fn orientation(&self) -> f64 {
        self.orientation
    }

    pub fn direction(&self) -> Vec2 {
        Vec2::from_polar(1.0, self.orientation)
    }

    /// Coordinates of `p` in the array frame: array along the x-axis,
    /// centered at the origin.
    pub fn to_local(&self, p: Vec2) -> Vec2 {
        (p - self.center).rotate(-self.orientation)
    }

    pub fn to_world(&self, p: Vec2) -> Vec2 {
        p.rotate(self.orientation) + self.center
    }
}

/// Arc `[-ψ, ψ]` of the zero-centered circle of radius `radius`,
/// parameterized by polar angle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UcaArc {
    radius: f64,
    half_aperture: f64,
}

impl UcaArc {
    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn half_aperture(&self) -> f64 {
        self.half_aperture
    }

    pub fn is_full_circle(&self) -> bool {
        (self.half_aperture - PI).abs() <= 1e-12
    }
}

/// Piecewise polynomial in `ρ`, one coefficient vector per piece in
/// ascending powers of `(ρ - breaks[i])`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PiecewisePolynomial {
    breaks: Vec<f64>,
    coeffs: Vec<Vec<f64>>,
}

impl PiecewisePolynomial {
    pub fn new(breaks: Vec<f64>, coeffs: Vec<Vec<f64>>) -> Result<Self> {
        if breaks.len() < 2 || coeffs.len() != breaks.len() - 1 {
            return Err(Error::Parameter(format!(
                "piecewise polynomial needs k+1 breaks for k pieces (got {} breaks, {} pieces)",
                breaks.len(),
                coeffs.len()
            )));
        }
        if breaks.windows(2).any(|w| !(w[0] < w[1])) || breaks.iter().any(|b| !b.is_finite()) {
            return Err(Error::Parameter(
                "piecewise polynomial breaks must be finite and strictly increasing".into(),
            ));
        }
        if coeffs
            .iter()
            .any(|c| c.is_empty() || c.iter().any(|v| !v.is_finite()))
        {
            return Err(Error::Parameter(
                "every piece needs at least one finite coefficient".into(),
            ));
        }
        Ok(Self { breaks, coeffs })
    }

    fn piece(&self, rho: f64) -> usize {
        let k = self.coeffs.len();
        match self.breaks[1..k].iter().position(|&b| rho < b) {
            Some(i) => i,
            None => k - 1,
        }
    }

    pub fn eval(&self, rho: f64) -> f64 {
        let i = self.piece(rho);
        let t = rho - self.breaks[i];
        self.coeffs[i].iter().rev().fold(0.0, |acc, &c| acc * t + c)
    }

    pub fn derivative(&self, rho: f64) -> f64 {
        let i = self.piece(rho);
        let t = rho - self.breaks[i];
        self.coeffs[i]
            .iter()
            .enumerate()
            .skip(1)
            .rev()
            .fold(0.0, |acc, (n, &c)| acc * t + n as f64 * c)
    }

    pub fn breaks(&self) -> &[f64] {
        &self.breaks
    }
}

/// Custom analytic curve: one piecewise polynomial per coordinate, sharing
/// the same breakpoints.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CustomCurve {
    x: PiecewisePolynomial,
    y: PiecewisePolynomial,
}

impl CustomCurve {
    pub fn new(x: PiecewisePolynomial, y: PiecewisePolynomial) -> Result<Self> {
        if x.breaks != y.breaks {
            return Err(Error::Parameter(
                "x and y polynomials must share their breakpoints".into(),
            ));
        }
        Ok(Self { x, y })
    }
}

/// Array topology as a parametric bijection `ν : [ρ_min, ρ_max] → ℝ²`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ParametricCurve {
    Ula(Ula),
    UcaArc(UcaArc),
    Custom(CustomCurve),
}

impl ParametricCurve {
    /// Horizontal linear array centered at the origin.
    pub fn ula(length: f64) -> Result<Self> {
        Self::ula_with(length, Vec2::ZERO, 0.0)
    }

    pub fn ula_with(length: f64, center: Vec2, orientation: f64) -> Result<Self> {
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::Parameter(format!(
                "ULA length must be positive, got {length}"
            )));
        }
        if !center.is_finite() || !orientation.is_finite() {
            return Err(Error::Parameter(
                "ULA center/orientation must be finite".into(),
            ));
        }
        Ok(ParametricCurve::Ula(Ula {
            length,
            center,
            orientation,
        }))
    }

    /// Circular arc of half-aperture `ψ ∈ (0, π]` on a zero-centered circle.
    pub fn uca_arc(radius: f64, half_aperture: f64) -> Result<Self> {
        if !(radius.is_finite() && radius > 0.0) {
            return Err(Error::Parameter(format!(
                "UCA radius must be positive, got {radius}"
            )));
        }
        if !(half_aperture > 0.0 && half_aperture <= PI + 1e-12) {
            return Err(Error::Parameter(format!(
                "UCA half-aperture must lie in (0, π], got {half_aperture}"
            )));
        }
        Ok(ParametricCurve::UcaArc(UcaArc {
            radius,
            half_aperture: half_aperture.min(PI),
        }))
    }

    pub fn custom(curve: CustomCurve) -> Self {
        ParametricCurve::Custom(curve)
    }

    /// Parametric domain `[ρ_min, ρ_max]`.
    pub fn domain(&self) -> (f64, f64) {
        match self {
            ParametricCurve::Ula(u) => (-0.5 * u.length, 0.5 * u.length),
            ParametricCurve::UcaArc(a) => (-a.half_aperture, a.half_aperture),
            ParametricCurve::Custom(c) => {
                let b = c.x.breaks();
                (b[0], b[b.len() - 1])
            }
        }
    }

    pub fn domain_length(&self) -> f64 {
        let (a, b) = self.domain();
        b - a
    }

    /// True when both domain endpoints map to the same physical point.
    pub fn is_closed(&self) -> bool {
        match self {
            ParametricCurve::UcaArc(a) => a.is_full_circle(),
            _ => false,
        }
    }

    fn check_domain(&self, rho: f64) -> Result<()> {
        let (min, max) = self.domain();
        let slack = 1e-12 * (max - min).max(1.0);
        if rho.is_finite() && rho >= min - slack && rho <= max + slack {
            Ok(())
        } else {
            Err(Error::OutOfDomain { rho, min, max })
        }
    }

    /// `ν(ρ)`.
    pub fn map(&self, rho: f64) -> Result<Vec2> {
        self.check_domain(rho)?;
        Ok(self.map_unchecked(rho))
    }

    /// `ν̇(ρ)`, evaluated analytically.
    pub fn derivative(&self, rho: f64) -> Result<Vec2> {
        self.check_domain(rho)?;
        Ok(self.derivative_unchecked(rho))
    }

    #[inline]
    pub(crate) fn map_unchecked(&self, rho: f64) -> Vec2 {
        match self {
            ParametricCurve::Ula(u) => u.center + u.direction() * rho,
            ParametricCurve::UcaArc(a) => Vec2::from_polar(a.radius, rho),
            ParametricCurve::Custom(c) => Vec2::new(c.x.eval(rho), c.y.eval(rho)),
        }
    }

    #[inline]
    pub(crate) fn derivative_unchecked(&self, rho: f64) -> Vec2 {
        match self {
            ParametricCurve::Ula(u) => u.direction(),
            ParametricCurve::UcaArc(a) => {
                let (s, c) = rho.sin_cos();
                Vec2::new(-a.radius * s, a.radius * c)
            }
            ParametricCurve::Custom(c) => Vec2::new(c.x.derivative(rho), c.y.derivative(rho)),
        }
    }

    /// Supremum of `‖ν̇(ρ)‖` over the domain.
    pub fn max_speed(&self) -> f64 {
        match self {
            ParametricCurve::Ula(_) => 1.0,
            ParametricCurve::UcaArc(a) => a.radius,
            ParametricCurve::Custom(_) => {
                let speed = |r: f64| self.derivative_unchecked(r).norm();
                let (r, _) = self.dense_argmax(speed, 4096);
                let (a, b) = self.domain();
                let h = (b - a) / 4096.0;
                golden_section_max(speed, (r - h).max(a), (r + h).min(b), 1e-14 * (b - a), 200).1
            }
        }
    }

    /// Arc length of the curve.
    pub fn arc_length(&self) -> f64 {
        match self {
            ParametricCurve::Ula(u) => u.length,
            ParametricCurve::UcaArc(a) => 2.0 * a.half_aperture * a.radius,
            ParametricCurve::Custom(c) => {
                let (a, b) = self.domain();
                integrate_adaptive(
                    |r| self.derivative_unchecked(r).norm(),
                    a,
                    b,
                    &c.x.breaks()[1..c.x.breaks().len() - 1],
                    1e-12,
                    2000,
                )
                .0
            }
        }
    }

    /// Distance from `p` to the curve and the parameter of the closest point.
    pub fn distance_to(&self, p: Vec2) -> (f64, f64) {
        let (a, b) = self.domain();
        match self {
            ParametricCurve::Ula(u) => {
                let local = u.to_local(p);
                let rho = local.x.clamp(a, b);
                ((p - self.map_unchecked(rho)).norm(), rho)
            }
            ParametricCurve::UcaArc(arc) => {
                let rho = if p.norm() == 0.0 {
                    0.0
                } else {
                    let t = p.angle();
                    if t.abs() <= arc.half_aperture {
                        t
                    } else {
                        // nearest endpoint
                        let d1 = (p - self.map_unchecked(a)).norm();
                        let d2 = (p - self.map_unchecked(b)).norm();
                        if d1 <= d2 {
                            a
                        } else {
                            b
                        }
                    }
                };
                ((p - self.map_unchecked(rho)).norm(), rho)
            }
            ParametricCurve::Custom(_) => {
                let neg_dist = |r: f64| -(p - self.map_unchecked(r)).norm();
                let (r, _) = self.dense_argmax(neg_dist, 4096);
                let h = (b - a) / 4096.0;
                let (r, nd) = golden_section_max(
                    neg_dist,
                    (r - h).max(a),
                    (r + h).min(b),
                    1e-14 * (b - a),
                    200,
                );
                (-nd, r)
            }
        }
    }

    fn dense_argmax(&self, f: impl Fn(f64) -> f64, n: usize) -> (f64, f64) {
        let (a, b) = self.domain();
        (0..=n)
            .map(|i| {
                let r = a + (b - a) * i as f64 / n as f64;
                (r, f(r))
            })
            .fold((a, f64::NEG_INFINITY), |best, cur| {
                if cur.1 > best.1 {
                    cur
                } else {
                    best
                }
            })
    }
}

/// How a uniform parametric grid is placed inside the domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Alignment {
    /// First sample on `ρ_min`.
    Start,
    /// Samples symmetric about the domain midpoint.
    #[default]
    Centered,
}

/// Uniform sampling of a curve's parametric domain; the antenna positions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParametricGrid {
    curve: ParametricCurve,
    spacing: f64,
    alignment: Alignment,
    samples: Vec<f64>,
    /// Lattice point dropped because it coincides with the first antenna.
    dropped_endpoint: Option<f64>,
}

impl ParametricGrid {
    pub fn curve(&self) -> &ParametricCurve {
        &self.curve
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn alignment(&self) -> Alignment {
        self.alignment
    }

    /// Parametric positions of the antennas, ascending.
    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Lattice origin `ρ_0`: every sample is `ρ_0 + iΔ`.
    pub fn origin(&self) -> f64 {
        self.samples[0]
    }

    pub fn dropped_endpoint(&self) -> Option<f64> {
        self.dropped_endpoint
    }

    /// Number of lattice points in the domain, counting a dropped duplicate.
    pub fn lattice_len(&self) -> usize {
        self.samples.len() + usize::from(self.dropped_endpoint.is_some())
    }

    /// Antenna positions in the plane.
    pub fn positions(&self) -> Vec<Vec2> {
        self.samples
            .iter()
            .map(|&r| self.curve.map_unchecked(r))
            .collect()
    }
}

/// Samples the curve's domain with spacing `spacing`.
///
/// Samples are built as integer multiples of the spacing from a fixed
/// origin. On a closed curve the last sample is dropped when it lands on the
/// first antenna.
pub fn sample_grid(
    curve: &ParametricCurve,
    spacing: f64,
    alignment: Alignment,
) -> Result<ParametricGrid> {
    let (a, b) = curve.domain();
    let len = b - a;
    if !(spacing.is_finite() && spacing > 0.0) {
        return Err(Error::Parameter(format!(
            "grid spacing must be positive, got {spacing}"
        )));
    }
    if spacing > len * (1.0 + 1e-12) {
        return Err(Error::Parameter(format!(
            "grid spacing {spacing} exceeds the domain length {len}"
        )));
    }
    let intervals = (len / spacing + 1e-9).floor() as usize;
    let origin = match alignment {
        Alignment::Start => a,
        Alignment::Centered => 0.5 * (a + b) - 0.5 * intervals as f64 * spacing,
    };
    let mut samples: Vec<f64> = (0..=intervals)
        .map(|i| (origin + i as f64 * spacing).clamp(a, b))
        .collect();

    let mut dropped_endpoint = None;
    if curve.is_closed() && samples.len() > 1 {
        let first = curve.map_unchecked(samples[0]);
        let last_rho = samples[samples.len() - 1];
        if (curve.map_unchecked(last_rho) - first).norm() < 1e-9 {
            samples.pop();
            dropped_endpoint = Some(last_rho);
        }
    }

    Ok(ParametricGrid {
        curve: curve.clone(),
        spacing,
        alignment,
        samples,
        dropped_endpoint,
    })
}

/// Outcome of the half-wavelength spacing test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpacingCheck {
    pub satisfied: bool,
    pub max_gap: f64,
}

/// Checks that every pair of adjacent antennas is at most `λ_c/2` apart.
///
/// On a closed curve the wrap-around pair counts as adjacent.
pub fn half_wavelength_check(grid: &ParametricGrid, phys: &PhysicalConfig) -> Result<SpacingCheck> {
    if grid.len() < 2 {
        return Err(Error::Parameter(
            "half-wavelength check needs at least two antennas".into(),
        ));
    }
    let pos = grid.positions();
    let mut max_gap = pos
        .windows(2)
        .map(|w| (w[1] - w[0]).norm())
        .fold(0.0, f64::max);
    if grid.curve().is_closed() {
        max_gap = max_gap.max((pos[0] - pos[pos.len() - 1]).norm());
    }
    Ok(SpacingCheck {
        satisfied: max_gap <= 0.5 * phys.wavelength() * (1.0 + 1e-12),
        max_gap,
    })
}
