//! Continuous- and discrete-space ambiguity functions.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{energy, MatchedSignalContext};
use crate::geometry::{ParametricCurve, ParametricGrid, PhysicalConfig, Vec2};
use crate::quadrature::ComplexSum;
use crate::spectral::soft_band_limit_numeric;

/// Hard cap on the number of quadrature samples per integral.
pub const MAX_QUADRATURE_SAMPLES: u64 = 1 << 27;

/// Step selection for the continuous-space AF quadrature.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "rule", content = "value")]
pub enum QuadratureStep {
    /// At most π/8 of phase per step under the worst-case local frequency
    /// `2k_c·max‖ν̇‖`.
    #[default]
    Bound,
    /// At most π/8 of phase per step under the pair's actual band limit
    /// plus one wavenumber of margin for the envelope.
    LocalBandLimit,
    /// Fixed parametric step.
    Fixed(f64),
}

fn intervals_for(len: f64, max_step: f64) -> Result<usize> {
    if !(max_step.is_finite() && max_step > 0.0) {
        return Err(Error::Parameter(format!(
            "quadrature step must be positive, got {max_step}"
        )));
    }
    let n = (len / max_step).ceil().max(64.0);
    let n = (n as u64 + 1) & !1;
    if n > MAX_QUADRATURE_SAMPLES {
        return Err(Error::Resource {
            required: n,
            limit: MAX_QUADRATURE_SAMPLES,
        });
    }
    Ok(n as usize)
}

/// Trapezoid rule on `n` (even) intervals with one Richardson step against
/// the `n/2` rule, summed in ascending `ρ` with compensation.
pub(crate) fn trapezoid_richardson(
    f: impl Fn(f64) -> Complex64 + Sync,
    a: f64,
    b: f64,
    n: usize,
) -> Complex64 {
    debug_assert!(n.is_multiple_of(2) && n >= 2);
    let h = (b - a) / n as f64;
    const CHUNK: usize = 1 << 14;
    let chunks = (n + 1).div_ceil(CHUNK);
    let partial: Vec<(ComplexSum, ComplexSum)> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut all = ComplexSum::default();
            let mut even = ComplexSum::default();
            for i in (c * CHUNK)..((c + 1) * CHUNK).min(n + 1) {
                let rho = if i == n { b } else { a + i as f64 * h };
                let mut v = f(rho);
                if i == 0 || i == n {
                    v *= 0.5;
                }
                all.add(v);
                if i % 2 == 0 {
                    even.add(v);
                }
            }
            (all, even)
        })
        .collect();
    let mut all = ComplexSum::default();
    let mut even = ComplexSum::default();
    for (p_all, p_even) in partial {
        all.add(p_all.total());
        even.add(p_even.total());
    }
    let fine = all.total() * h;
    let coarse = even.total() * (2.0 * h);
    (fine * 4.0 - coarse) / 3.0
}

/// Maximum step allowed by `rule` for this context.
pub(crate) fn continuous_step(ctx: &MatchedSignalContext<'_>, rule: QuadratureStep) -> f64 {
    let k = ctx.phys().wavenumber();
    match rule {
        QuadratureStep::Bound => std::f64::consts::PI / (8.0 * 2.0 * k * ctx.curve().max_speed()),
        QuadratureStep::LocalBandLimit => {
            let band = soft_band_limit_numeric(ctx).k;
            std::f64::consts::PI / (8.0 * (band + k))
        }
        QuadratureStep::Fixed(h) => h,
    }
}

/// Continuous-space AF `A(x̃, x) = ∫ g(ρ) dρ`.
pub fn af_continuous(ctx: &MatchedSignalContext<'_>, rule: QuadratureStep) -> Result<Complex64> {
    let (a, b) = ctx.curve().domain();
    let n = intervals_for(b - a, continuous_step(ctx, rule))?;
    Ok(trapezoid_richardson(|r| ctx.signal_unchecked(r), a, b, n))
}

/// Discrete-space AF `A_S(x̃, x) = Δ·Σ_{ρ ∈ grid} g(ρ)`.
pub fn af_discrete(ctx: &MatchedSignalContext<'_>, grid: &ParametricGrid) -> Result<Complex64> {
    if grid.curve() != ctx.curve() {
        return Err(Error::Parameter(
            "grid was sampled from a different curve than the context".into(),
        ));
    }
    let mut acc = ComplexSum::default();
    for &rho in grid.samples() {
        acc.add(ctx.signal_unchecked(rho));
    }
    Ok(acc.total() * grid.spacing())
}

/// Rectangular evaluation region of tested locations, sampled with `nx × ny`
/// nodes including the borders.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
    pub nx: usize,
    pub ny: usize,
}

impl Region {
    pub fn new(x: (f64, f64), y: (f64, f64), nx: usize, ny: usize) -> Result<Self> {
        if !(x.0 < x.1 && y.0 < y.1) || ![x.0, x.1, y.0, y.1].iter().all(|v| v.is_finite()) {
            return Err(Error::Parameter(format!(
                "region bounds must be finite and increasing, got x={x:?} y={y:?}"
            )));
        }
        if nx < 2 || ny < 2 {
            return Err(Error::Parameter(format!(
                "region resolution must be at least 2×2, got {nx}×{ny}"
            )));
        }
        Ok(Self {
            x_min: x.0,
            x_max: x.1,
            y_min: y.0,
            y_max: y.1,
            nx,
            ny,
        })
    }

    pub fn dx(&self) -> f64 {
        (self.x_max - self.x_min) / (self.nx - 1) as f64
    }

    pub fn dy(&self) -> f64 {
        (self.y_max - self.y_min) / (self.ny - 1) as f64
    }

    /// Node `(i, j)`, `i` along x and `j` along y.
    pub fn node(&self, i: usize, j: usize) -> Vec2 {
        let x = if i + 1 == self.nx {
            self.x_max
        } else {
            self.x_min + i as f64 * self.dx()
        };
        let y = if j + 1 == self.ny {
            self.y_max
        } else {
            self.y_min + j as f64 * self.dy()
        };
        Vec2::new(x, y)
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Nodes in row-major order (`y` outer, `x` inner).
    pub fn nodes(&self) -> impl Iterator<Item = Vec2> + '_ {
        (0..self.ny).flat_map(move |j| (0..self.nx).map(move |i| self.node(i, j)))
    }

    pub fn contains(&self, p: Vec2) -> bool {
        p.x >= self.x_min && p.x <= self.x_max && p.y >= self.y_min && p.y <= self.y_max
    }
}

/// Which ambiguity function a grid evaluation computes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AfKind {
    Discrete,
    Continuous(QuadratureStep),
}

/// AF sampled over a region of tested locations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AfGridResult {
    pub region: Region,
    pub source: Vec2,
    pub kind: AfKind,
    /// Antenna spacing of the discrete array (absent for continuous AFs).
    pub spacing: Option<f64>,
    pub curve: ParametricCurve,
    /// Row-major values; masked nodes hold zero.
    pub values: Vec<Complex64>,
    /// Nodes too close to the curve to evaluate.
    pub masked: Vec<bool>,
}

impl AfGridResult {
    pub fn value(&self, i: usize, j: usize) -> Option<Complex64> {
        let idx = j * self.region.nx + i;
        (!self.masked[idx]).then(|| self.values[idx])
    }

    /// Index `(i, j)` and value of the unmasked node with the largest |AF|.
    pub fn argmax(&self) -> Option<((usize, usize), Complex64)> {
        let mut best: Option<(usize, Complex64)> = None;
        for (idx, (&v, &m)) in self.values.iter().zip(&self.masked).enumerate() {
            if !m && best.is_none_or(|(_, b)| v.norm() > b.norm()) {
                best = Some((idx, v));
            }
        }
        best.map(|(idx, v)| ((idx % self.region.nx, idx / self.region.nx), v))
    }
}

/// Evaluates the AF at every node of `region`.
///
/// Nodes are independent, so the result does not depend on the number of
/// worker threads. Nodes within the singularity guard of the curve are
/// masked.
pub fn af_grid(
    curve: &ParametricCurve,
    phys: &PhysicalConfig,
    grid: Option<&ParametricGrid>,
    source: Vec2,
    region: &Region,
    kind: AfKind,
) -> Result<AfGridResult> {
    if kind == AfKind::Discrete && grid.is_none() {
        return Err(Error::Parameter(
            "the discrete AF needs an antenna grid".into(),
        ));
    }
    let energy_source = energy(curve, phys, source)?;
    let nodes: Vec<Vec2> = region.nodes().collect();
    let evaluated: Vec<Result<Option<Complex64>>> = nodes
        .par_iter()
        .map(|&tested| {
            let ctx = match MatchedSignalContext::with_source_energy(
                curve,
                *phys,
                tested,
                source,
                energy_source,
            ) {
                Ok(ctx) => ctx,
                Err(Error::Singularity { .. }) => return Ok(None),
                Err(e) => return Err(e),
            };
            match kind {
                AfKind::Discrete => af_discrete(&ctx, grid.expect("checked above")).map(Some),
                AfKind::Continuous(rule) => af_continuous(&ctx, rule).map(Some),
            }
        })
        .collect();

    let mut values = Vec::with_capacity(nodes.len());
    let mut masked = Vec::with_capacity(nodes.len());
    for v in evaluated {
        match v? {
            Some(z) => {
                values.push(z);
                masked.push(false);
            }
            None => {
                values.push(Complex64::new(0.0, 0.0));
                masked.push(true);
            }
        }
    }
    Ok(AfGridResult {
        region: *region,
        source,
        kind,
        spacing: grid.map(|g| g.spacing()),
        curve: curve.clone(),
        values,
        masked,
    })
}
