//! Steering signals and the matched signal with its chirp decomposition.
//!
//! The matched signal along the array parameter is
//! `g(ρ) = α(ρ)·exp(−jξ(ρ))` with
//!
//! * `α(ρ) = ‖ν̇(ρ)‖·a(ν(ρ); x̃)·a(ν(ρ); x)`
//! * `ξ(ρ) = k_c(‖ν(ρ) − x‖ − ‖ν(ρ) − x̃‖)`
//!
//! The speed factor `‖ν̇‖` carries the arc-length measure onto the parameter,
//! so `∫ g dρ` is the unit-normalized correlation for every topology. It is
//! identically one for linear arrays.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::geometry::{ParametricCurve, PhysicalConfig, Vec2};
use crate::quadrature::integrate_adaptive;

/// Source locations closer than this many wavelengths to the curve are
/// rejected.
pub const SINGULARITY_GUARD: f64 = 1e-6;

const ENERGY_REL_TOL: f64 = 1e-9;

fn guard(curve: &ParametricCurve, phys: &PhysicalConfig, p: Vec2) -> Result<f64> {
    if !p.is_finite() {
        return Err(Error::Parameter(format!(
            "location ({}, {}) is not finite",
            p.x, p.y
        )));
    }
    let (distance, rho) = curve.distance_to(p);
    let limit = SINGULARITY_GUARD * phys.wavelength();
    if distance <= limit {
        return Err(Error::Singularity {
            x: p.x,
            y: p.y,
            distance,
            guard: limit,
        });
    }
    Ok(rho)
}

/// Received energy `E(x) = ∫_Z ‖z − x‖⁻² dz` along the curve.
pub fn energy(curve: &ParametricCurve, phys: &PhysicalConfig, x: Vec2) -> Result<f64> {
    let closest = guard(curve, phys, x)?;
    let (a, b) = curve.domain();
    let mut breaks = vec![closest];
    if let ParametricCurve::Custom(_) = curve {
        // piece boundaries are where derivatives may jump
        let n = 16;
        breaks.extend((1..n).map(|i| a + (b - a) * i as f64 / n as f64));
    }
    let integrand = |r: f64| {
        let d = curve.map_unchecked(r) - x;
        curve.derivative_unchecked(r).norm() / d.norm_sq()
    };
    let (value, _) = integrate_adaptive(integrand, a, b, &breaks, ENERGY_REL_TOL, 20_000);
    Ok(value)
}

/// Steering-signal amplitude `a(z; x) = (E^{1/2}(x)·‖z − x‖)⁻¹`.
#[inline]
fn amplitude(distance: f64, energy: f64) -> f64 {
    1.0 / (energy.sqrt() * distance)
}

/// Steering signal `h(ν(ρ); x) = a·exp(−jk_c‖ν(ρ) − x‖)`.
pub fn steering(
    curve: &ParametricCurve,
    phys: &PhysicalConfig,
    x: Vec2,
    energy_x: f64,
    rho: f64,
) -> Result<Complex64> {
    let z = curve.map(rho)?;
    let d = (z - x).norm();
    if d <= SINGULARITY_GUARD * phys.wavelength() {
        return Err(Error::Singularity {
            x: x.x,
            y: x.y,
            distance: d,
            guard: SINGULARITY_GUARD * phys.wavelength(),
        });
    }
    Ok(Complex64::from_polar(
        amplitude(d, energy_x),
        -phys.wavenumber() * d,
    ))
}

/// Pair of tested / true locations seen through one array, with the two
/// received energies precomputed.
#[derive(Debug, Clone)]
pub struct MatchedSignalContext<'a> {
    curve: &'a ParametricCurve,
    phys: PhysicalConfig,
    tested: Vec2,
    source: Vec2,
    energy_tested: f64,
    energy_source: f64,
}

impl<'a> MatchedSignalContext<'a> {
    pub fn new(
        curve: &'a ParametricCurve,
        phys: PhysicalConfig,
        tested: Vec2,
        source: Vec2,
    ) -> Result<Self> {
        let energy_source = energy(curve, &phys, source)?;
        Self::with_source_energy(curve, phys, tested, source, energy_source)
    }

    /// Builds a context reusing a previously computed `E(x)` of the source.
    pub fn with_source_energy(
        curve: &'a ParametricCurve,
        phys: PhysicalConfig,
        tested: Vec2,
        source: Vec2,
        energy_source: f64,
    ) -> Result<Self> {
        guard(curve, &phys, source)?;
        let energy_tested = if tested == source {
            energy_source
        } else {
            energy(curve, &phys, tested)?
        };
        Ok(Self {
            curve,
            phys,
            tested,
            source,
            energy_tested,
            energy_source,
        })
    }

    /// Context for phase-only work: both locations are guarded but the
    /// energies are left undefined, so amplitudes must not be queried.
    pub(crate) fn phase_only(
        curve: &'a ParametricCurve,
        phys: PhysicalConfig,
        tested: Vec2,
        source: Vec2,
    ) -> Result<Self> {
        guard(curve, &phys, source)?;
        guard(curve, &phys, tested)?;
        Ok(Self {
            curve,
            phys,
            tested,
            source,
            energy_tested: f64::NAN,
            energy_source: f64::NAN,
        })
    }

    pub fn curve(&self) -> &'a ParametricCurve {
        self.curve
    }

    pub fn phys(&self) -> &PhysicalConfig {
        &self.phys
    }

    pub fn tested(&self) -> Vec2 {
        self.tested
    }

    pub fn source(&self) -> Vec2 {
        self.source
    }

    pub fn energy_tested(&self) -> f64 {
        self.energy_tested
    }

    pub fn energy_source(&self) -> f64 {
        self.energy_source
    }

    /// Context with the roles of the two locations exchanged.
    pub fn swapped(&self) -> Self {
        Self {
            curve: self.curve,
            phys: self.phys,
            tested: self.source,
            source: self.tested,
            energy_tested: self.energy_source,
            energy_source: self.energy_tested,
        }
    }

    /// `α(ρ)`.
    pub fn amplitude(&self, rho: f64) -> Result<f64> {
        self.curve.map(rho)?;
        Ok(self.amplitude_unchecked(rho))
    }

    /// `ξ(ρ)`.
    pub fn phase(&self, rho: f64) -> Result<f64> {
        self.curve.map(rho)?;
        Ok(self.phase_unchecked(rho))
    }

    /// `g(ρ)`.
    pub fn signal(&self, rho: f64) -> Result<Complex64> {
        self.curve.map(rho)?;
        Ok(self.signal_unchecked(rho))
    }

    /// `ξ̇(ρ) = k_c·[û(ν − x) − û(ν − x̃)]·ν̇`.
    pub fn local_frequency(&self, rho: f64) -> Result<f64> {
        self.curve.map(rho)?;
        Ok(self.local_frequency_unchecked(rho))
    }

    #[inline]
    pub(crate) fn amplitude_unchecked(&self, rho: f64) -> f64 {
        let z = self.curve.map_unchecked(rho);
        let speed = self.curve.derivative_unchecked(rho).norm();
        speed
            * (amplitude((z - self.tested).norm(), self.energy_tested)
                * amplitude((z - self.source).norm(), self.energy_source))
    }

    #[inline]
    pub(crate) fn phase_unchecked(&self, rho: f64) -> f64 {
        let z = self.curve.map_unchecked(rho);
        let ds = (z - self.source).norm();
        let dt = (z - self.tested).norm();
        // ‖a‖² − ‖b‖² = (b_vec − a_vec)·(a_vec + b_vec), free of cancellation
        let diff_sq = (self.tested - self.source).dot((z - self.source) + (z - self.tested));
        let diff = if ds + dt > 0.0 {
            diff_sq / (ds + dt)
        } else {
            0.0
        };
        self.phys.wavenumber() * diff
    }

    #[inline]
    pub(crate) fn signal_unchecked(&self, rho: f64) -> Complex64 {
        let z = self.curve.map_unchecked(rho);
        let speed = self.curve.derivative_unchecked(rho).norm();
        let ds = (z - self.source).norm();
        let dt = (z - self.tested).norm();
        let alpha = speed * (amplitude(dt, self.energy_tested) * amplitude(ds, self.energy_source));
        let diff_sq = (self.tested - self.source).dot((z - self.source) + (z - self.tested));
        let xi = self.phys.wavenumber() * diff_sq / (ds + dt);
        Complex64::from_polar(alpha, -xi)
    }

    #[inline]
    pub(crate) fn local_frequency_unchecked(&self, rho: f64) -> f64 {
        let z = self.curve.map_unchecked(rho);
        let dz = self.curve.derivative_unchecked(rho);
        let us = z - self.source;
        let ut = z - self.tested;
        self.phys.wavenumber() * (us.dot(dz) / us.norm() - ut.dot(dz) / ut.norm())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::{PI, TAU};

    fn phys() -> PhysicalConfig {
        PhysicalConfig::normalized()
    }

    #[test]
    fn energy_ula_closed_form() {
        let ula = ParametricCurve::ula(2.0).unwrap();
        let e = energy(&ula, &phys(), Vec2::new(0.0, 1.0)).unwrap();
        assert!((e - PI / 2.0).abs() < 1e-12);
    }

    #[test]
    fn energy_full_circle_at_center() {
        let r = 7.0;
        let uca = ParametricCurve::uca_arc(r, PI).unwrap();
        let e = energy(&uca, &phys(), Vec2::ZERO).unwrap();
        assert!((e - TAU / r).abs() < 1e-12);
    }

    #[test]
    fn energy_toy_matches_trapezoid_oracle() {
        let ula = ParametricCurve::ula(1000.0).unwrap();
        let x = Vec2::new(0.0, 600.0);
        let e = energy(&ula, &phys(), x).unwrap();
        // brute-force trapezoid, 10⁶ intervals
        let n = 1_000_000;
        let h = 1000.0 / n as f64;
        let f = |r: f64| 1.0 / (r * r + 600.0 * 600.0);
        let mut acc = 0.5 * (f(-500.0) + f(500.0));
        for i in 1..n {
            acc += f(-500.0 + i as f64 * h);
        }
        let oracle = acc * h;
        assert!((e - oracle).abs() / oracle < 1e-8);
    }

    #[test]
    fn energy_rejects_location_on_curve() {
        let ula = ParametricCurve::ula(10.0).unwrap();
        let err = energy(&ula, &phys(), Vec2::new(1.0, 1e-9)).unwrap_err();
        assert!(matches!(err, Error::Singularity { .. }));
        // beyond the end of the array the location is fine
        assert!(energy(&ula, &phys(), Vec2::new(6.0, 0.0)).is_ok());
    }

    #[test]
    fn steering_examples() {
        let ula = ParametricCurve::ula(100.0).unwrap();
        let x = Vec2::new(10.0, 20.0);
        let e = energy(&ula, &phys(), x).unwrap();
        let near = steering(&ula, &phys(), x, e, 10.0).unwrap().norm();
        let far = steering(&ula, &phys(), x, e, -50.0).unwrap().norm();
        assert!(near > far);

        // one wavelength away: phase 2π ≡ 0
        let x1 = Vec2::new(0.0, 1.0);
        let e1 = energy(&ula, &phys(), x1).unwrap();
        let h = steering(&ula, &phys(), x1, e1, 0.0).unwrap();
        assert!(h.im.abs() < 1e-12 * h.norm() && h.re > 0.0);
    }

    #[test]
    fn steering_has_unit_energy() {
        for (curve, x) in [
            (
                ParametricCurve::ula(1000.0).unwrap(),
                Vec2::new(30.0, 600.0),
            ),
            (
                ParametricCurve::uca_arc(50.0, PI).unwrap(),
                Vec2::new(3.0, -4.0),
            ),
            (
                ParametricCurve::uca_arc(50.0, 0.3 * PI).unwrap(),
                Vec2::new(3.0, -4.0),
            ),
        ] {
            let e = energy(&curve, &phys(), x).unwrap();
            let (val, _) = integrate_adaptive(
                |r| {
                    steering(&curve, &phys(), x, e, r).unwrap().norm_sqr()
                        * curve.derivative_unchecked(r).norm()
                },
                curve.domain().0,
                curve.domain().1,
                &[],
                1e-12,
                5000,
            );
            assert!((val - 1.0).abs() < 1e-6, "{val}");
        }
    }

    #[test]
    fn identical_locations_give_flat_phase() {
        let ula = ParametricCurve::ula(100.0).unwrap();
        let x = Vec2::new(5.0, 30.0);
        let ctx = MatchedSignalContext::new(&ula, phys(), x, x).unwrap();
        for r in [-50.0, -3.0, 0.0, 17.5, 50.0] {
            assert_eq!(ctx.phase(r).unwrap(), 0.0);
            assert_eq!(ctx.local_frequency(r).unwrap(), 0.0);
            let g = ctx.signal(r).unwrap();
            assert!(g.im == 0.0 && g.re > 0.0);
        }
    }

    #[test]
    fn local_frequency_horizontal_pair_dense_max() {
        // x = [0,1], x̃ = [1,1] on a long ULA: max |ξ̇| = k_c/√1.25
        let ula = ParametricCurve::ula(400.0).unwrap();
        let ctx = MatchedSignalContext::new(&ula, phys(), Vec2::new(1.0, 1.0), Vec2::new(0.0, 1.0))
            .unwrap();
        let n = 400_000;
        let best = (0..=n)
            .map(|i| {
                ctx.local_frequency(-200.0 + 400.0 * i as f64 / n as f64)
                    .unwrap()
                    .abs()
            })
            .fold(0.0, f64::max);
        let expected = TAU / 1.25f64.sqrt();
        assert!((best - expected).abs() / expected < 1e-6);
    }

    #[test]
    fn toy_signal_envelope_is_slow() {
        let ula = ParametricCurve::ula(1000.0).unwrap();
        let ctx =
            MatchedSignalContext::new(&ula, phys(), Vec2::new(50.0, 700.0), Vec2::new(0.0, 600.0))
                .unwrap();
        let n = 20_000;
        let rhos: Vec<f64> = (0..=n)
            .map(|i| -500.0 + 1000.0 * i as f64 / n as f64)
            .collect();
        let amp: Vec<f64> = rhos.iter().map(|&r| ctx.amplitude(r).unwrap()).collect();
        let ph: Vec<f64> = rhos.iter().map(|&r| ctx.phase(r).unwrap()).collect();
        let h = rhos[1] - rhos[0];
        let max_rate = |v: &[f64], rel: bool| {
            v.windows(2)
                .map(|w| {
                    let d = (w[1] - w[0]).abs() / h;
                    if rel {
                        d / w[0]
                    } else {
                        d
                    }
                })
                .fold(0.0, f64::max)
        };
        // envelope log-derivative far below the chirp rate
        assert!(max_rate(&amp, true) < 1e-2 * max_rate(&ph, false));
    }

    fn arb_point() -> impl Strategy<Value = Vec2> {
        (-300.0..300.0f64, 1.0..600.0f64, any::<bool>())
            .prop_map(|(x, y, up)| Vec2::new(x, if up { y } else { -y }))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]

        #[test]
        fn local_frequency_is_phase_derivative(t in arb_point(), s in arb_point(), u in 0.01..0.99f64) {
            let ula = ParametricCurve::ula(500.0).unwrap();
            let ctx = MatchedSignalContext::new(&ula, phys(), t, s).unwrap();
            let rho = -250.0 + 500.0 * u;
            let h = 1e-4;
            let fd = (ctx.phase(rho + h).unwrap() - ctx.phase(rho - h).unwrap()) / (2.0 * h);
            let lf = ctx.local_frequency(rho).unwrap();
            prop_assert!((fd - lf).abs() <= 1e-6 * lf.abs().max(1e-3));
        }

        #[test]
        fn swap_conjugates_signal(t in arb_point(), s in arb_point(), u in 0.0..1.0f64) {
            let ula = ParametricCurve::ula(500.0).unwrap();
            let ctx = MatchedSignalContext::new(&ula, phys(), t, s).unwrap();
            let sw = ctx.swapped();
            let rho = -250.0 + 500.0 * u;
            prop_assert_eq!(sw.phase(rho).unwrap(), -ctx.phase(rho).unwrap());
            prop_assert_eq!(sw.local_frequency(rho).unwrap(), -ctx.local_frequency(rho).unwrap());
            prop_assert_eq!(sw.signal(rho).unwrap(), ctx.signal(rho).unwrap().conj());
            let a = ctx.amplitude(rho).unwrap();
            prop_assert!((ctx.signal(rho).unwrap().norm() - a).abs() <= 4.0 * f64::EPSILON * a);
        }

        #[test]
        fn phase_and_frequency_bounds(t in arb_point(), s in arb_point(), u in 0.0..1.0f64) {
            let uca = ParametricCurve::uca_arc(1000.0, PI).unwrap();
            let ctx = MatchedSignalContext::new(&uca, phys(), t, s).unwrap();
            let rho = -PI + TAU * u;
            let k = phys().wavenumber();
            prop_assert!(ctx.phase(rho).unwrap().abs() <= k * (t - s).norm() * (1.0 + 1e-12) + 1e-9);
            prop_assert!(ctx.local_frequency(rho).unwrap().abs() <= 2.0 * k * 1000.0);
        }
    }
}
