//! Matched spectrum, aliasing decomposition and band limits.
//!
//! Frequencies are in radians per parametric unit: per wavelength for a
//! ULA, per radian of arc for a UCA. Both `K` and the antenna spacing `Δ`
//! share that unit, so the aliasing-free condition `K ≤ 2π/Δ` is
//! unit-consistent for every topology.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::MatchedSignalContext;
use crate::geometry::{ParametricCurve, ParametricGrid, PhysicalConfig, Vec2};
use crate::optimize::golden_section_max;
use crate::quadrature::{ComplexSum, NeumaierSum};

/// Upper limit on stored signal samples for a spectrum evaluation.
pub const MAX_SPECTRUM_SAMPLES: u64 = 1 << 23;

/// Sampled matched spectrum `G(ω) = ∫ g(ρ) e^{−jωρ} dρ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumSamples {
    pub omega: Vec<f64>,
    pub values: Vec<Complex64>,
    pub tested: Vec2,
    pub source: Vec2,
    /// `∫ |g|² dρ`, computed from the same samples as the spectrum.
    pub signal_energy: f64,
}

impl SpectrumSamples {
    pub fn len(&self) -> usize {
        self.omega.len()
    }

    pub fn is_empty(&self) -> bool {
        self.omega.is_empty()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Value closest to `ω`.
    pub fn nearest(&self, omega: f64) -> Option<Complex64> {
        let idx = self.omega.partition_point(|&w| w < omega);
        let candidates = [idx.checked_sub(1), (idx < self.len()).then_some(idx)];
        candidates
            .into_iter()
            .flatten()
            .min_by(|&a, &b| {
                (self.omega[a] - omega)
                    .abs()
                    .total_cmp(&(self.omega[b] - omega).abs())
            })
            .map(|i| self.values[i])
    }

    /// Relative mismatch between `∫|G|²dω / 2π` over the sampled band and
    /// `∫|g|²dρ`. Small only when the grid covers the spectral support.
    pub fn parseval_residual(&self) -> f64 {
        let mut acc = NeumaierSum::default();
        for i in 1..self.len() {
            let dw = self.omega[i] - self.omega[i - 1];
            acc.add(0.5 * dw * (self.values[i].norm_sqr() + self.values[i - 1].norm_sqr()));
        }
        let spectral = acc.total() / (2.0 * PI);
        (spectral - self.signal_energy).abs() / self.signal_energy.max(f64::MIN_POSITIVE)
    }

    /// Writes `omega,re,im,abs_db` rows; `abs_db` is floored at −120 dB.
    pub fn write_csv<W: std::io::Write>(&self, w: W) -> std::io::Result<()> {
        crate::io::write_spectrum_csv(self, w)
    }
}

fn quadrature_intervals(len: f64, max_step: f64, limit: u64) -> Result<usize> {
    let n = (len / max_step).ceil().max(64.0) as u64;
    let n = (n + 1) & !1;
    if n + 1 > limit {
        return Err(Error::Resource {
            required: n + 1,
            limit,
        });
    }
    Ok(n as usize)
}

/// Evaluates the matched spectrum on `omega` (strictly increasing).
pub fn matched_spectrum(ctx: &MatchedSignalContext<'_>, omega: &[f64]) -> Result<SpectrumSamples> {
    if omega.iter().any(|w| !w.is_finite()) {
        return Err(Error::Parameter("frequency grid must be finite".into()));
    }
    if omega.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Parameter(
            "frequency grid must be strictly increasing".into(),
        ));
    }
    let k = ctx.phys().wavenumber();
    let w_max = omega.iter().fold(0.0f64, |m, w| m.max(w.abs()));
    let (a, b) = ctx.curve().domain();
    let max_step = PI / (8.0 * (2.0 * k * ctx.curve().max_speed() + w_max));
    let n = quadrature_intervals(b - a, max_step, MAX_SPECTRUM_SAMPLES)?;
    let h = (b - a) / n as f64;
    let node = |i: usize| if i == n { b } else { a + i as f64 * h };

    let g: Vec<Complex64> = (0..=n)
        .into_par_iter()
        .map(|i| ctx.signal_unchecked(node(i)))
        .collect();

    let weight = |i: usize| if i == 0 || i == n { 0.5 } else { 1.0 };
    let signal_energy = {
        let mut fine = NeumaierSum::default();
        let mut coarse = NeumaierSum::default();
        for (i, v) in g.iter().enumerate() {
            let t = weight(i) * v.norm_sqr();
            fine.add(t);
            if i % 2 == 0 {
                coarse.add(t);
            }
        }
        (4.0 * fine.total() * h - coarse.total() * 2.0 * h) / 3.0
    };

    let values = omega
        .par_iter()
        .map(|&w| {
            let mut fine = ComplexSum::default();
            let mut coarse = ComplexSum::default();
            for (i, v) in g.iter().enumerate() {
                let (s, c) = (w * node(i)).sin_cos();
                let t = *v * Complex64::new(c, -s) * weight(i);
                fine.add(t);
                if i % 2 == 0 {
                    coarse.add(t);
                }
            }
            (fine.total() * (4.0 * h) - coarse.total() * (2.0 * h)) / 3.0
        })
        .collect();

    Ok(SpectrumSamples {
        omega: omega.to_vec(),
        values,
        tested: ctx.tested(),
        source: ctx.source(),
        signal_energy,
    })
}

/// `n` evenly spaced frequencies spanning `[lo, hi]`.
pub fn frequency_grid(lo: f64, hi: f64, n: usize) -> Result<Vec<f64>> {
    if !(lo < hi) || n < 2 || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::Parameter(format!(
            "invalid frequency grid [{lo}, {hi}] with {n} points"
        )));
    }
    let step = (hi - lo) / (n - 1) as f64;
    Ok((0..n)
        .map(|i| if i + 1 == n { hi } else { lo + i as f64 * step })
        .collect())
}

/// Largest `|ω|` on the grid with `|G(ω)| > ε·max|G|`, or 0 if none.
pub fn strict_band_limit(spectrum: &SpectrumSamples, epsilon: f64) -> Result<f64> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::Parameter(format!(
            "threshold must lie in (0, 1), got {epsilon}"
        )));
    }
    let threshold = epsilon * spectrum.max_abs();
    Ok(spectrum
        .omega
        .iter()
        .zip(&spectrum.values)
        .filter(|(_, v)| v.norm() > threshold)
        .map(|(w, _)| w.abs())
        .fold(0.0, f64::max))
}

/// Upper bound `2k_c·max‖ν̇‖` on the local frequency of any matched signal.
pub fn band_limit_upper_bound(curve: &ParametricCurve, phys: &PhysicalConfig) -> f64 {
    2.0 * phys.wavenumber() * curve.max_speed()
}

/// Smallest number of spectral repetitions on each side that covers the
/// support bound of every matched signal on the curve.
pub fn required_repetitions(curve: &ParametricCurve, phys: &PhysicalConfig, spacing: f64) -> usize {
    (spacing * band_limit_upper_bound(curve, phys) / (2.0 * PI)).ceil() as usize + 2
}

/// Poisson-summation split of the discrete AF.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AliasedDecomposition {
    /// `G(0)`, the continuous AF.
    pub continuous: Complex64,
    /// `Σ_{p≠0, |p|≤P} G(2πp/Δ)·e^{j2πpρ₀/Δ}`.
    pub aliasing: Complex64,
    /// Half-weight correction for antennas sitting on the domain endpoints,
    /// where the truncated signal jumps.
    pub boundary: Complex64,
    /// `continuous + aliasing + boundary`.
    pub reconstructed: Complex64,
    pub p_max: usize,
    pub p_required: usize,
    /// `p_max / p_required`; below 1 the repetitions may miss part of the
    /// band.
    pub coverage_ratio: f64,
    pub insufficient_repetitions: bool,
}

/// Splits `A_S` into the continuous AF and its spectral repetitions.
///
/// `p_max` defaults to [`required_repetitions`].
pub fn aliased_decomposition(
    ctx: &MatchedSignalContext<'_>,
    grid: &ParametricGrid,
    p_max: Option<usize>,
) -> Result<AliasedDecomposition> {
    if grid.curve() != ctx.curve() {
        return Err(Error::Parameter(
            "grid was sampled from a different curve than the context".into(),
        ));
    }
    let spacing = grid.spacing();
    let p_required = required_repetitions(ctx.curve(), ctx.phys(), spacing);
    let p_max = p_max.unwrap_or(p_required);
    let p = p_max as i64;
    let omega: Vec<f64> = (-p..=p).map(|q| 2.0 * PI * q as f64 / spacing).collect();
    let spectrum = matched_spectrum(ctx, &omega)?;

    let origin = grid.origin();
    let mut aliasing = ComplexSum::default();
    for (q, g) in (-p..=p).zip(&spectrum.values) {
        if q != 0 {
            let phase = 2.0 * PI * q as f64 * origin / spacing;
            aliasing.add(*g * Complex64::from_polar(1.0, phase));
        }
    }
    let continuous = spectrum.values[p_max];
    let aliasing = aliasing.total();

    let boundary = endpoint_correction(ctx, grid);

    Ok(AliasedDecomposition {
        continuous,
        aliasing,
        boundary,
        reconstructed: continuous + aliasing + boundary,
        p_max,
        p_required,
        coverage_ratio: p_max as f64 / p_required as f64,
        insufficient_repetitions: p_max < p_required,
    })
}

/// Difference between `Δ·Σ g` over the grid and the half-weighted lattice
/// sum that Poisson summation describes.
///
/// Antennas sitting on an open curve's endpoints count fully in `A_S` but
/// only half in the Poisson sum, since the truncated signal jumps there. On
/// a closed curve the dropped duplicate endpoint cancels the first antenna's
/// half weight.
pub fn endpoint_correction(ctx: &MatchedSignalContext<'_>, grid: &ParametricGrid) -> Complex64 {
    let spacing = grid.spacing();
    let (a, b) = ctx.curve().domain();
    let on_edge = |r: f64, e: f64| (r - e).abs() <= 1e-9 * spacing;
    let mut boundary = Complex64::new(0.0, 0.0);
    let samples = grid.samples();
    if let (Some(&first), Some(&last)) = (samples.first(), samples.last()) {
        if on_edge(first, a) {
            boundary += ctx.signal_unchecked(a) * (0.5 * spacing);
        }
        if on_edge(last, b) && samples.len() > 1 {
            boundary += ctx.signal_unchecked(b) * (0.5 * spacing);
        }
    }
    if let Some(dropped) = grid.dropped_endpoint() {
        boundary -= ctx.signal_unchecked(dropped) * (0.5 * spacing);
    }
    boundary
}

/// How a band limit was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BandLimitMethod {
    Numeric,
    ClosedForm,
}

/// Which candidate attains a finite-ULA band limit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// The unconstrained maximizer lies on the array.
    Interior,
    /// The secondary stationary point lies on the array.
    Secondary,
    /// Only the array edges compete.
    Edge,
}

/// Soft band limit `K = max |ξ̇|` and where it is attained.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BandLimitResult {
    #[serde(rename = "K")]
    pub k: f64,
    pub rho_bar: f64,
    pub method: BandLimitMethod,
    pub regime: Option<Regime>,
}

const MIN_SCAN: usize = 4096;
const MAX_SCAN: usize = 1 << 20;
const MAX_CANDIDATES: usize = 16;

/// Number of dense-scan samples used by [`soft_band_limit_numeric`].
pub fn scan_density(curve: &ParametricCurve, phys: &PhysicalConfig) -> usize {
    let per_wavelength = (8.0 * curve.arc_length() / phys.wavelength()).ceil();
    (per_wavelength.min(MAX_SCAN as f64) as usize).max(MIN_SCAN)
}

/// Numerical soft band limit by dense scan and golden-section refinement.
pub fn soft_band_limit_numeric(ctx: &MatchedSignalContext<'_>) -> BandLimitResult {
    soft_band_limit_with_density(ctx, scan_density(ctx.curve(), ctx.phys()))
}

/// As [`soft_band_limit_numeric`] with an explicit scan density.
pub fn soft_band_limit_with_density(
    ctx: &MatchedSignalContext<'_>,
    samples: usize,
) -> BandLimitResult {
    let samples = samples.max(3);
    let (a, b) = ctx.curve().domain();
    let h = (b - a) / (samples - 1) as f64;
    let node = |i: usize| {
        if i + 1 == samples {
            b
        } else {
            a + i as f64 * h
        }
    };
    let f = |r: f64| ctx.local_frequency_unchecked(r).abs();
    let scan: Vec<f64> = (0..samples).into_par_iter().map(|i| f(node(i))).collect();

    let mut candidates: Vec<usize> = (0..samples)
        .filter(|&i| {
            let left = i == 0 || scan[i] >= scan[i - 1];
            let right = i + 1 == samples || scan[i] >= scan[i + 1];
            left && right
        })
        .collect();
    candidates.sort_by(|&i, &j| scan[j].total_cmp(&scan[i]).then(i.cmp(&j)));
    candidates.truncate(MAX_CANDIDATES);

    let tol = 1e-12 * (b - a);
    let mut best = (node(0), scan[0]);
    for i in candidates {
        let lo = node(i.saturating_sub(1));
        let hi = node((i + 1).min(samples - 1));
        let (r, v) = golden_section_max(f, lo, hi, tol, 200);
        let (r, v) = if scan[i] > v {
            (node(i), scan[i])
        } else {
            (r, v)
        };
        if v > best.1 {
            best = (r, v);
        }
    }
    BandLimitResult {
        k: best.1,
        rho_bar: best.0,
        method: BandLimitMethod::Numeric,
        regime: None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ambiguity::{af_continuous, af_discrete, QuadratureStep};
    use crate::geometry::{sample_grid, Alignment};
    use proptest::prelude::*;

    fn phys() -> PhysicalConfig {
        PhysicalConfig::normalized()
    }

    fn toy() -> ParametricCurve {
        ParametricCurve::ula(1000.0).unwrap()
    }

    #[test]
    fn spectrum_at_zero_is_continuous_af() {
        let ula = toy();
        let ctx =
            MatchedSignalContext::new(&ula, phys(), Vec2::new(0.0, 700.0), Vec2::new(0.0, 600.0))
                .unwrap();
        let s = matched_spectrum(&ctx, &[0.0]).unwrap();
        let a = af_continuous(&ctx, QuadratureStep::Bound).unwrap();
        assert!((s.values[0] - a).norm() < 1e-4);
    }

    #[test]
    fn autocorrelation_spectrum_peaks_at_zero() {
        let ula = ParametricCurve::ula(200.0).unwrap();
        let x = Vec2::new(5.0, 50.0);
        let ctx = MatchedSignalContext::new(&ula, phys(), x, x).unwrap();
        let omega = frequency_grid(-1.0, 1.0, 401).unwrap();
        let s = matched_spectrum(&ctx, &omega).unwrap();
        let (imax, _) = s
            .values
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.norm().total_cmp(&b.1.norm()))
            .unwrap();
        assert_eq!(s.omega[imax], 0.0);
        assert!((s.values[imax] - Complex64::new(1.0, 0.0)).norm() < 1e-6);
    }

    #[test]
    fn toy_spectrum_has_band_edge_peak() {
        let ula = toy();
        let ctx =
            MatchedSignalContext::new(&ula, phys(), Vec2::new(0.0, 700.0), Vec2::new(0.0, 600.0))
                .unwrap();
        let k = soft_band_limit_numeric(&ctx).k;
        let omega = frequency_grid(-1.2 * k, 1.2 * k, 1201).unwrap();
        let s = matched_spectrum(&ctx, &omega).unwrap();
        assert!(k < 2.0 * PI / 10.0);
        let mags: Vec<f64> = s.values.iter().map(|v| v.norm()).collect();
        let mut center: Vec<f64> = s
            .omega
            .iter()
            .zip(&mags)
            .filter(|(w, _)| w.abs() <= 0.5 * k)
            .map(|(_, m)| *m)
            .collect();
        center.sort_by(f64::total_cmp);
        let median = center[center.len() / 2];
        let edge = s
            .omega
            .iter()
            .zip(&mags)
            .filter(|(w, _)| w.abs() > 0.8 * k && w.abs() <= 1.05 * k)
            .map(|(_, m)| *m)
            .fold(0.0, f64::max);
        assert!(20.0 * (edge / median).log10() >= 3.0);
    }

    #[test]
    fn parseval_holds_on_a_covering_grid() {
        let ula = ParametricCurve::ula(100.0).unwrap();
        let ctx =
            MatchedSignalContext::new(&ula, phys(), Vec2::new(5.0, 70.0), Vec2::new(0.0, 60.0))
                .unwrap();
        let k = soft_band_limit_numeric(&ctx).k;
        let reach = k + 80.0;
        let n = (2.0 * reach / (2.0 * PI / 100.0 / 8.0)) as usize;
        let omega = frequency_grid(-reach, reach, n).unwrap();
        let s = matched_spectrum(&ctx, &omega).unwrap();
        eprintln!("parseval {}", s.parseval_residual());
        assert!(s.parseval_residual() < 1e-3);
    }

    #[test]
    fn strict_band_limit_behaviour() {
        let ula = ParametricCurve::ula(200.0).unwrap();
        let x = Vec2::new(0.0, 50.0);
        let ctx = MatchedSignalContext::new(&ula, phys(), x, x).unwrap();
        let omega = frequency_grid(-2.0, 2.0, 801).unwrap();
        let s = matched_spectrum(&ctx, &omega).unwrap();
        let half = strict_band_limit(&s, 0.5).unwrap();
        // half-power point by direct scan of the positive side
        let scan = s
            .omega
            .iter()
            .zip(&s.values)
            .filter(|(w, v)| **w >= 0.0 && v.norm() > 0.5 * s.max_abs())
            .map(|(w, _)| *w)
            .fold(0.0, f64::max);
        assert_eq!(half, scan);
        assert!(half > 0.0);
        assert!(strict_band_limit(&s, 1e-300).unwrap() == 2.0);
        let mut last = f64::INFINITY;
        for eps in [0.01, 0.1, 0.3, 0.6, 0.9] {
            let v = strict_band_limit(&s, eps).unwrap();
            assert!(v <= last);
            last = v;
        }
        assert!(strict_band_limit(&s, 1.5).is_err());
    }

    #[test]
    fn poisson_identity_on_toy_example() {
        let ula = toy();
        let grid = sample_grid(&ula, 10.0, Alignment::Centered).unwrap();
        let ctx =
            MatchedSignalContext::new(&ula, phys(), Vec2::new(0.0, 700.0), Vec2::new(0.0, 600.0))
                .unwrap();
        let d = aliased_decomposition(&ctx, &grid, None).unwrap();
        let direct = af_discrete(&ctx, &grid).unwrap();
        assert!((d.reconstructed - direct).norm() <= 1e-3);
        assert!(!d.insufficient_repetitions);
        assert_eq!(d.p_required, 22);

        let x = Vec2::new(0.0, 600.0);
        let ctx = MatchedSignalContext::new(&ula, phys(), x, x).unwrap();
        let d = aliased_decomposition(&ctx, &grid, None).unwrap();
        assert!(d.aliasing.norm() <= 1e-3);
    }

    #[test]
    fn dense_ula_has_negligible_aliasing() {
        let ula = ParametricCurve::ula(100.0).unwrap();
        let grid = sample_grid(&ula, 0.5, Alignment::Centered).unwrap();
        let ctx =
            MatchedSignalContext::new(&ula, phys(), Vec2::new(10.0, 30.0), Vec2::new(-5.0, 20.0))
                .unwrap();
        let d = aliased_decomposition(&ctx, &grid, None).unwrap();
        assert!(d.aliasing.norm() <= 1e-3);
        let direct = af_discrete(&ctx, &grid).unwrap();
        assert!((d.reconstructed - direct).norm() <= 1e-3);
    }

    #[test]
    fn poisson_identity_on_full_circle() {
        let uca = ParametricCurve::uca_arc(20.0, PI).unwrap();
        let grid = sample_grid(&uca, 2.0 * PI / 100.0, Alignment::Centered).unwrap();
        let ctx =
            MatchedSignalContext::new(&uca, phys(), Vec2::new(1.0, 2.0), Vec2::new(-2.0, 0.5))
                .unwrap();
        let d = aliased_decomposition(&ctx, &grid, None).unwrap();
        assert!(d.boundary.norm() < 1e-15);
        let direct = af_discrete(&ctx, &grid).unwrap();
        assert!((d.reconstructed - direct).norm() <= 1e-3);
    }

    #[test]
    fn insufficient_repetitions_are_flagged() {
        let ula = ParametricCurve::ula(100.0).unwrap();
        let grid = sample_grid(&ula, 5.0, Alignment::Centered).unwrap();
        let ctx =
            MatchedSignalContext::new(&ula, phys(), Vec2::new(10.0, 30.0), Vec2::new(-5.0, 20.0))
                .unwrap();
        let d = aliased_decomposition(&ctx, &grid, Some(3)).unwrap();
        assert!(d.insufficient_repetitions);
        assert!(d.coverage_ratio < 1.0);
    }

    #[test]
    fn spectrum_rejects_bad_grids() {
        let ula = toy();
        let ctx = MatchedSignalContext::new(&ula, phys(), Vec2::new(0.0, 7.0), Vec2::new(0.0, 6.0))
            .unwrap();
        assert!(matches!(
            matched_spectrum(&ctx, &[1.0, 0.0]),
            Err(Error::Parameter(_))
        ));
        assert!(matches!(
            matched_spectrum(&ctx, &[1e9]),
            Err(Error::Resource { .. })
        ));
    }

    #[test]
    fn numeric_band_limit_examples() {
        let ula = ParametricCurve::ula(4000.0).unwrap();
        let x = Vec2::new(0.0, 1.0);
        let ctx = MatchedSignalContext::new(&ula, phys(), x, x).unwrap();
        assert_eq!(soft_band_limit_numeric(&ctx).k, 0.0);

        let ctx = MatchedSignalContext::new(&ula, phys(), Vec2::new(1.0, 1.0), x).unwrap();
        let r = soft_band_limit_numeric(&ctx);
        let k = 2.0 * PI;
        assert!((r.k - k / 1.25f64.sqrt()).abs() < 1e-9 * k);
        assert!((r.rho_bar - 0.5).abs() < 1e-6);
        assert_eq!(r.method, BandLimitMethod::Numeric);

        let radius = 50.0;
        let uca = ParametricCurve::uca_arc(radius, PI).unwrap();
        let sep = 1.0;
        let ctx = MatchedSignalContext::new(&uca, phys(), Vec2::new(sep, 0.0), Vec2::ZERO).unwrap();
        let r = soft_band_limit_numeric(&ctx);
        // finite radius: ≈ k·R up to O(R/R_uca)
        assert!((r.k - k * sep).abs() / (k * sep) < 0.05);
    }

    #[test]
    fn upper_bound_examples() {
        assert_eq!(band_limit_upper_bound(&toy(), &phys()), 4.0 * PI);
        let uca = ParametricCurve::uca_arc(1e4, PI).unwrap();
        assert!((band_limit_upper_bound(&uca, &phys()) - 4.0 * PI * 1e4).abs() < 1e-6);
    }

    #[test]
    fn scan_density_follows_curve_length() {
        assert_eq!(
            scan_density(&ParametricCurve::ula(10.0).unwrap(), &phys()),
            4096
        );
        assert_eq!(
            scan_density(&ParametricCurve::ula(1000.0).unwrap(), &phys()),
            8000
        );
        let uca = ParametricCurve::uca_arc(1e6, PI).unwrap();
        assert_eq!(scan_density(&uca, &phys()), 1 << 20);
    }

    fn point(range: f64) -> impl Strategy<Value = Vec2> {
        (-range..range, 1.0..range).prop_map(|(x, y)| Vec2::new(x, y))
    }

    #[test]
    fn band_edge_transition_leaks_just_inside_the_limit() {
        // K at 97% of 2π/Δ: the folded band-edge peak already reaches ω = 0
        let ula = ParametricCurve::ula(120.0).unwrap();
        let t = Vec2::new(-38.225554957303984, 40.35600811262756);
        let s = Vec2::new(-16.52228446311895, 39.61803551520431);
        let spacing = 1.845901368788466;
        let grid = sample_grid(&ula, spacing, Alignment::Centered).unwrap();
        let ctx = MatchedSignalContext::new(&ula, phys(), t, s).unwrap();
        let k = soft_band_limit_numeric(&ctx).k;
        assert!(k <= 2.0 * PI / spacing && k >= 0.95 * 2.0 * PI / spacing);
        let ad = af_discrete(&ctx, &grid).unwrap();
        let ac = af_continuous(&ctx, QuadratureStep::Bound).unwrap();
        assert!((ad - ac).norm() > 5e-2);
    }

    const MARGIN: f64 = 0.9;

    fn paper_point() -> impl Strategy<Value = Vec2> {
        (-600.0..600.0f64, 100.0..1000.0f64).prop_map(|(x, y)| Vec2::new(x, y))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(96))]

        #[test]
        fn numeric_band_limit_respects_bound(t in point(200.0), s in point(200.0)) {
            let ula = ParametricCurve::ula(300.0).unwrap();
            let ctx = MatchedSignalContext::new(&ula, phys(), t, s).unwrap();
            let r = soft_band_limit_numeric(&ctx);
            prop_assert!(r.k <= band_limit_upper_bound(&ula, &phys()) * (1.0 + 1e-12));
            prop_assert!(r.k >= 0.0);
            let (a, b) = ula.domain();
            prop_assert!(r.rho_bar >= a && r.rho_bar <= b);
            let at = ctx.local_frequency(r.rho_bar).unwrap().abs();
            prop_assert!((at - r.k).abs() <= 1e-9 * r.k.max(1e-300));
        }

        #[test]
        fn numeric_band_limit_stable_under_denser_scan(t in point(100.0), s in point(100.0)) {
            let ula = ParametricCurve::ula(150.0).unwrap();
            let ctx = MatchedSignalContext::new(&ula, phys(), t, s).unwrap();
            let n = scan_density(&ula, &phys());
            let a = soft_band_limit_with_density(&ctx, n).k;
            let b = soft_band_limit_with_density(&ctx, 2 * n).k;
            prop_assert!((a - b).abs() <= 1e-9 * a.max(b).max(1e-300));
        }

        #[test]
        fn full_circle_band_limit_is_isotropic(theta in -PI..PI) {
            let uca = ParametricCurve::uca_arc(1e4, PI).unwrap();
            let t = Vec2::from_polar(5.0, theta);
            let ctx = MatchedSignalContext::new(&uca, phys(), t, Vec2::ZERO).unwrap();
            let r = soft_band_limit_numeric(&ctx).k;
            let t0 = Vec2::from_polar(5.0, 0.3);
            let r0 = soft_band_limit_numeric(&MatchedSignalContext::new(&uca, phys(), t0, Vec2::ZERO).unwrap()).k;
            prop_assert!((r - r0).abs() <= 1e-6 * r0);
        }

        #[test]
        fn wide_arc_band_limit_is_nearly_isotropic(theta in -PI..PI, psi in (PI / 2.0)..PI) {
            // residual anisotropy is the O(‖x‖/R_uca) finite-radius effect
            let uca = ParametricCurve::uca_arc(1e4, psi).unwrap();
            let s = Vec2::new(1.0, -2.0);
            let t = s + Vec2::from_polar(5.0, theta);
            let ctx = MatchedSignalContext::new(&uca, phys(), t, s).unwrap();
            let r = soft_band_limit_numeric(&ctx).k;
            let t0 = s + Vec2::from_polar(5.0, 0.3);
            let r0 = soft_band_limit_numeric(&MatchedSignalContext::new(&uca, phys(), t0, s).unwrap()).k;
            prop_assert!((r - r0).abs() <= 1e-3 * r0);
        }

        #[test]
        fn lemma_one_realized(s in paper_point(), offset in (-100.0..100.0f64, -150.0..150.0f64), frac in 0.05..MARGIN) {
            let ula = ParametricCurve::ula(1000.0).unwrap();
            let t = s + Vec2::new(offset.0, offset.1);
            let ctx = MatchedSignalContext::new(&ula, phys(), t, s).unwrap();
            let k = soft_band_limit_numeric(&ctx).k;
            let spacing = (frac * 2.0 * PI / k).min(20.0);
            let grid = sample_grid(&ula, spacing, Alignment::Centered).unwrap();
            let ad = af_discrete(&ctx, &grid).unwrap();
            let ac = af_continuous(&ctx, QuadratureStep::Bound).unwrap();
            let edge = endpoint_correction(&ctx, &grid);
            prop_assert!((ad - ac - edge).norm() <= 5e-2, "K·Δ/2π = {}", k * spacing / (2.0 * PI));
        }
    }
}
