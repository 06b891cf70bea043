//! Aliasing-free regions and aliasing-safe operating domains.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ambiguity::Region;
use crate::closedform::{k_finite_ula, k_inf_ula, k_uca, k_uca_with_radius};
use crate::error::{Error, Result};
use crate::field::MatchedSignalContext;
use crate::geometry::{ParametricCurve, PhysicalConfig, Ula, Vec2};
use crate::spectral::soft_band_limit_numeric;

/// Relative slack on `K·Δ ≤ 2π` absorbing rounding in `Δ* = 2π/K`.
pub const LEVEL_RTOL: f64 = 1e-12;

/// Target `|K − 2π/Δ| / (2π/Δ)` for refined contour vertices.
pub const CONTOUR_LEVEL_TOL: f64 = 1e-3;

/// A soft band limit `K(x̃, x)` in the parametric units of its array.
pub trait BandLimitFn: Sync {
    fn band_limit(&self, tested: Vec2, source: Vec2) -> Result<f64>;

    /// Whether `K(x̃, x) = K(x, x̃)`.
    fn symmetric(&self) -> bool {
        true
    }

    fn label(&self) -> String;
}

/// Closed-form ULA band limit, finite or infinite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UlaClosedForm {
    ula: Ula,
    finite: bool,
    phys: PhysicalConfig,
}

impl UlaClosedForm {
    pub fn new(curve: &ParametricCurve, phys: PhysicalConfig, finite: bool) -> Result<Self> {
        match curve {
            ParametricCurve::Ula(ula) => Ok(Self {
                ula: *ula,
                finite,
                phys,
            }),
            _ => Err(Error::Parameter(
                "the ULA closed form needs a linear array".into(),
            )),
        }
    }
}

impl BandLimitFn for UlaClosedForm {
    fn band_limit(&self, tested: Vec2, source: Vec2) -> Result<f64> {
        let (t, s) = (self.ula.to_local(tested), self.ula.to_local(source));
        let r = if self.finite {
            k_finite_ula(self.ula.length(), t, s, &self.phys)?
        } else {
            k_inf_ula(t, s, &self.phys)?
        };
        Ok(r.k)
    }

    fn label(&self) -> String {
        if self.finite {
            "closed_form_finite_ula".into()
        } else {
            "closed_form_infinite_ula".into()
        }
    }
}

/// Infinite-radius closed form for a circular arc.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UcaClosedForm {
    half_aperture: f64,
    radius: Option<f64>,
    phys: PhysicalConfig,
}

impl UcaClosedForm {
    pub fn new(half_aperture: f64, phys: PhysicalConfig) -> Result<Self> {
        crate::closedform::visual_aperture(0.0, half_aperture)?;
        Ok(Self {
            half_aperture,
            radius: None,
            phys,
        })
    }

    /// Takes the half-aperture and radius from an arc.
    pub fn from_curve(curve: &ParametricCurve, phys: PhysicalConfig) -> Result<Self> {
        match curve {
            ParametricCurve::UcaArc(arc) => Ok(Self {
                half_aperture: arc.half_aperture(),
                radius: Some(arc.radius()),
                phys,
            }),
            _ => Err(Error::Parameter(
                "the UCA closed form needs a circular arc".into(),
            )),
        }
    }
}

impl BandLimitFn for UcaClosedForm {
    fn band_limit(&self, tested: Vec2, source: Vec2) -> Result<f64> {
        let r = match self.radius {
            Some(radius) => {
                k_uca_with_radius(tested, source, self.half_aperture, radius, &self.phys)?
            }
            None => k_uca(tested, source, self.half_aperture, &self.phys)?,
        };
        Ok(r.k)
    }

    fn label(&self) -> String {
        "closed_form_uca".into()
    }
}

/// Numerical soft band limit on an arbitrary curve.
#[derive(Debug, Clone, PartialEq)]
pub struct NumericBandLimit {
    curve: ParametricCurve,
    phys: PhysicalConfig,
}

impl NumericBandLimit {
    pub fn new(curve: ParametricCurve, phys: PhysicalConfig) -> Self {
        Self { curve, phys }
    }
}

impl BandLimitFn for NumericBandLimit {
    fn band_limit(&self, tested: Vec2, source: Vec2) -> Result<f64> {
        if tested == source {
            return Ok(0.0);
        }
        let ctx = MatchedSignalContext::phase_only(&self.curve, self.phys, tested, source)?;
        Ok(soft_band_limit_numeric(&ctx).k)
    }

    fn label(&self) -> String {
        "numeric".into()
    }
}

fn level(spacing: f64) -> Result<f64> {
    if !(spacing > 0.0 && spacing.is_finite()) {
        return Err(Error::Parameter(format!(
            "antenna spacing must be positive, got {spacing}"
        )));
    }
    Ok(2.0 * PI / spacing)
}

/// `K(x̃, x) ≤ 2π/Δ`.
pub fn is_aliasing_free(
    kfn: &dyn BandLimitFn,
    tested: Vec2,
    source: Vec2,
    spacing: f64,
) -> Result<bool> {
    let level = level(spacing)?;
    Ok(kfn.band_limit(tested, source)? <= level * (1.0 + LEVEL_RTOL))
}

/// Position of the contour level relative to the sampled field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ContourStatus {
    /// Every evaluated node is aliasing free; no contour in the region.
    AllFree,
    /// Every evaluated node aliases; no contour in the region.
    AllAliased,
    /// The AFR boundary crosses the region.
    Boundary,
}

/// Polyline of contour vertices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Polyline {
    pub points: Vec<Vec2>,
    pub closed: bool,
}

/// AFR boundary `K(·, x) = 2π/Δ` traced over a region.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AfrContour {
    pub source: Vec2,
    pub spacing: f64,
    pub level: f64,
    pub method: String,
    pub region: Region,
    pub status: ContourStatus,
    pub polylines: Vec<Polyline>,
    /// Nodes where `K` could not be evaluated (too close to the array).
    pub masked_nodes: usize,
    /// Largest `|K − level|/level` over the emitted vertices.
    pub max_level_error: f64,
}

impl AfrContour {
    pub fn vertex_count(&self) -> usize {
        self.polylines.iter().map(|p| p.points.len()).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum EdgeKey {
    /// Edge from node `(i, j)` to `(i + 1, j)`.
    Horizontal(usize, usize),
    /// Edge from node `(i, j)` to `(i, j + 1)`.
    Vertical(usize, usize),
}

/// Illinois regula falsi on `f` between `a` (f ≤ 0) and `b` (f > 0).
fn refine_crossing(
    f: &dyn Fn(Vec2) -> Result<f64>,
    mut a: Vec2,
    mut fa: f64,
    mut b: Vec2,
    mut fb: f64,
    tol: f64,
) -> Result<(Vec2, f64)> {
    let mut side = 0i8;
    let mut best = if fa.abs() <= fb.abs() {
        (a, fa)
    } else {
        (b, fb)
    };
    for _ in 0..60 {
        if best.1.abs() <= tol {
            break;
        }
        let t = fa / (fa - fb);
        let p = a + (b - a) * t.clamp(0.0, 1.0);
        let fp = f(p)?;
        if fp.abs() < best.1.abs() {
            best = (p, fp);
        }
        if (fp <= 0.0) == (fa <= 0.0) {
            a = p;
            fa = fp;
            if side == -1 {
                fb *= 0.5;
            }
            side = -1;
        } else {
            b = p;
            fb = fp;
            if side == 1 {
                fa *= 0.5;
            }
            side = 1;
        }
        if (b - a).norm() <= 1e-14 * (1.0 + a.norm()) {
            break;
        }
    }
    Ok(best)
}

/// Marching-squares extraction of the AFR boundary of `source`.
pub fn afr_contour(
    kfn: &dyn BandLimitFn,
    source: Vec2,
    spacing: f64,
    region: &Region,
) -> Result<AfrContour> {
    let level = level(spacing)?;
    if region.nx < 16 || region.ny < 16 {
        return Err(Error::Parameter(format!(
            "contour resolution must be at least 16×16, got {}×{}",
            region.nx, region.ny
        )));
    }
    let (nx, ny) = (region.nx, region.ny);
    let eval = |p: Vec2| -> Result<Option<f64>> {
        match kfn.band_limit(p, source) {
            Ok(k) => Ok(Some(k - level)),
            Err(Error::Singularity { .. }) | Err(Error::Domain(_)) => Ok(None),
            Err(e) => Err(e),
        }
    };
    let field: Vec<Option<f64>> = (0..nx * ny)
        .into_par_iter()
        .map(|idx| eval(region.node(idx % nx, idx / nx)))
        .collect::<Result<_>>()?;
    let at = |i: usize, j: usize| field[j * nx + i];
    let masked_nodes = field.iter().filter(|v| v.is_none()).count();
    let free = |v: f64| v <= level * LEVEL_RTOL;

    let mut any_free = false;
    let mut any_aliased = false;
    for v in field.iter().flatten() {
        if free(*v) {
            any_free = true;
        } else {
            any_aliased = true;
        }
    }
    let mut out = AfrContour {
        source,
        spacing,
        level,
        method: kfn.label(),
        region: *region,
        status: ContourStatus::Boundary,
        polylines: Vec::new(),
        masked_nodes,
        max_level_error: 0.0,
    };
    if !(any_free && any_aliased) {
        out.status = if any_aliased {
            ContourStatus::AllAliased
        } else {
            ContourStatus::AllFree
        };
        return Ok(out);
    }

    // Cell segments as pairs of crossed edges.
    let mut segments: Vec<(EdgeKey, EdgeKey)> = Vec::new();
    for j in 0..ny - 1 {
        for i in 0..nx - 1 {
            let corners = [at(i, j), at(i + 1, j), at(i + 1, j + 1), at(i, j + 1)];
            let Some(vals) = corners.into_iter().collect::<Option<Vec<f64>>>() else {
                continue;
            };
            let inside: Vec<bool> = vals.iter().map(|&v| free(v)).collect();
            let edges = [
                EdgeKey::Horizontal(i, j),
                EdgeKey::Vertical(i + 1, j),
                EdgeKey::Horizontal(i, j + 1),
                EdgeKey::Vertical(i, j),
            ];
            // edge e joins corners e and (e + 1) % 4
            let crossed: Vec<usize> = (0..4)
                .filter(|&e| inside[e] != inside[(e + 1) % 4])
                .collect();
            match crossed.len() {
                2 => segments.push((edges[crossed[0]], edges[crossed[1]])),
                4 => {
                    let center =
                        region.node(i, j) + Vec2::new(0.5 * region.dx(), 0.5 * region.dy());
                    let center_free = match eval(center)? {
                        Some(v) => free(v),
                        None => inside[0],
                    };
                    if center_free == inside[0] {
                        // diagonal 0–2 connected: cut off corners 1 and 3
                        segments.push((edges[0], edges[1]));
                        segments.push((edges[2], edges[3]));
                    } else {
                        segments.push((edges[3], edges[0]));
                        segments.push((edges[1], edges[2]));
                    }
                }
                _ => {}
            }
        }
    }

    // One refined vertex per crossed edge.
    let mut keys: Vec<EdgeKey> = segments.iter().flat_map(|&(a, b)| [a, b]).collect();
    keys.sort();
    keys.dedup();
    let f = |p: Vec2| -> Result<f64> { Ok(kfn.band_limit(p, source)? - level) };
    let tol = CONTOUR_LEVEL_TOL * level;
    let vertices: Vec<(Vec2, f64)> = keys
        .par_iter()
        .map(|&key| {
            let (p0, p1) = match key {
                EdgeKey::Horizontal(i, j) => ((i, j), (i + 1, j)),
                EdgeKey::Vertical(i, j) => ((i, j), (i, j + 1)),
            };
            let (a, b) = (region.node(p0.0, p0.1), region.node(p1.0, p1.1));
            let (fa, fb) = (at(p0.0, p0.1).unwrap(), at(p1.0, p1.1).unwrap());
            let (lo, flo, hi, fhi) = if free(fa) {
                (a, fa, b, fb)
            } else {
                (b, fb, a, fa)
            };
            refine_crossing(&f, lo, flo, hi, fhi, tol)
        })
        .collect::<Result<_>>()?;
    let vertex: BTreeMap<EdgeKey, Vec2> = keys
        .iter()
        .copied()
        .zip(vertices.iter().map(|v| v.0))
        .collect();
    out.max_level_error = vertices
        .iter()
        .map(|v| v.1.abs() / level)
        .fold(0.0, f64::max);

    // Stitch segments sharing an edge into polylines.
    let mut adjacency: BTreeMap<EdgeKey, Vec<usize>> = BTreeMap::new();
    for (s, &(a, b)) in segments.iter().enumerate() {
        adjacency.entry(a).or_default().push(s);
        adjacency.entry(b).or_default().push(s);
    }
    let mut used = vec![false; segments.len()];
    let other = |s: usize, e: EdgeKey| {
        if segments[s].0 == e {
            segments[s].1
        } else {
            segments[s].0
        }
    };
    let next_unused = |e: EdgeKey, used: &[bool]| adjacency[&e].iter().copied().find(|&s| !used[s]);

    // Open chains start at edges with a single segment, closed loops anywhere.
    let mut starts: Vec<EdgeKey> = adjacency
        .iter()
        .filter(|(_, v)| v.len() == 1)
        .map(|(k, _)| *k)
        .collect();
    starts.extend(segments.iter().map(|s| s.0));
    for start in starts {
        let Some(mut seg) = next_unused(start, &used) else {
            continue;
        };
        let mut chain = vec![start];
        let mut cur = start;
        loop {
            used[seg] = true;
            cur = other(seg, cur);
            chain.push(cur);
            match next_unused(cur, &used) {
                Some(s) => seg = s,
                None => break,
            }
        }
        let closed = chain.len() > 2 && chain.first() == chain.last();
        if closed {
            chain.pop();
        }
        out.polylines.push(Polyline {
            points: chain.iter().map(|e| vertex[e]).collect(),
            closed,
        });
    }
    Ok(out)
}

/// Shape of an operating domain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum DomainShape {
    Point { at: Vec2 },
    Disc { center: Vec2, radius: f64 },
    Rectangle { min: Vec2, max: Vec2 },
    Polygon { vertices: Vec<Vec2> },
}

impl DomainShape {
    pub fn contains(&self, p: Vec2) -> bool {
        let eps = 1e-9;
        match self {
            DomainShape::Point { at } => *at == p,
            DomainShape::Disc { center, radius } => (p - *center).norm() <= radius * (1.0 + eps),
            DomainShape::Rectangle { min, max } => {
                let tol = eps * (*max - *min).norm();
                p.x >= min.x - tol && p.x <= max.x + tol && p.y >= min.y - tol && p.y <= max.y + tol
            }
            DomainShape::Polygon { vertices } => {
                let n = vertices.len();
                let scale = self.diameter();
                for k in 0..n {
                    if segment_distance(p, vertices[k], vertices[(k + 1) % n]) <= eps * scale {
                        return true;
                    }
                }
                let mut inside = false;
                for k in 0..n {
                    let (a, b) = (vertices[k], vertices[(k + 1) % n]);
                    if (a.y > p.y) != (b.y > p.y) {
                        let x = a.x + (p.y - a.y) / (b.y - a.y) * (b.x - a.x);
                        if p.x < x {
                            inside = !inside;
                        }
                    }
                }
                inside
            }
        }
    }

    pub fn diameter(&self) -> f64 {
        match self {
            DomainShape::Point { .. } => 0.0,
            DomainShape::Disc { radius, .. } => 2.0 * radius,
            DomainShape::Rectangle { min, max } => (*max - *min).norm(),
            DomainShape::Polygon { vertices } => {
                let mut d: f64 = 0.0;
                for a in vertices {
                    for b in vertices {
                        d = d.max((*a - *b).norm());
                    }
                }
                d
            }
        }
    }

    fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Parameter(m.into()));
        match self {
            DomainShape::Point { at } if !at.is_finite() => bad("point must be finite"),
            DomainShape::Disc { center, radius }
                if !center.is_finite() || !(*radius > 0.0 && radius.is_finite()) =>
            {
                bad("disc needs a finite center and positive radius")
            }
            DomainShape::Rectangle { min, max }
                if !min.is_finite() || !max.is_finite() || !(min.x < max.x && min.y < max.y) =>
            {
                bad("rectangle needs finite, increasing corners")
            }
            DomainShape::Polygon { vertices }
                if vertices.len() < 3 || vertices.iter().any(|v| !v.is_finite()) =>
            {
                bad("polygon needs at least three finite vertices")
            }
            _ => Ok(()),
        }
    }
}

fn segment_distance(p: Vec2, a: Vec2, b: Vec2) -> f64 {
    let ab = b - a;
    let t = if ab.norm_sq() > 0.0 {
        ((p - a).dot(ab) / ab.norm_sq()).clamp(0.0, 1.0)
    } else {
        0.0
    };
    (p - (a + ab * t)).norm()
}

fn boundary_samples(a: Vec2, b: Vec2, spacing: f64, out: &mut Vec<Vec2>) {
    let n = ((b - a).norm() / spacing).ceil().max(1.0) as usize;
    for k in 0..n {
        out.push(a + (b - a) * (k as f64 / n as f64));
    }
}

/// Set of candidate source locations, represented by samples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OperatingDomain {
    pub shape: DomainShape,
    /// Lattice step of the interior samples (0 for a point).
    pub sample_spacing: f64,
    pub samples: Vec<Vec2>,
}

/// Sampling step above which ASOD verdicts are flagged under-sampled,
/// as a fraction of the domain diameter.
pub const MAX_RELATIVE_SAMPLE_SPACING: f64 = 1.0 / 16.0;

impl OperatingDomain {
    /// Uniform lattice with step `spacing` plus boundary samples at most
    /// `spacing` apart.
    pub fn sample(shape: DomainShape, spacing: f64) -> Result<Self> {
        shape.validate()?;
        if let DomainShape::Point { at } = shape {
            return Ok(Self {
                shape,
                sample_spacing: 0.0,
                samples: vec![at],
            });
        }
        if !(spacing > 0.0 && spacing.is_finite()) {
            return Err(Error::Parameter(format!(
                "sample spacing must be positive, got {spacing}"
            )));
        }
        let (lo, hi, anchor) = match &shape {
            DomainShape::Disc { center, radius } => (
                *center - Vec2::new(*radius, *radius),
                *center + Vec2::new(*radius, *radius),
                *center,
            ),
            DomainShape::Rectangle { min, max } => (*min, *max, *min),
            DomainShape::Polygon { vertices } => {
                let mut lo = vertices[0];
                let mut hi = vertices[0];
                for v in vertices {
                    lo = Vec2::new(lo.x.min(v.x), lo.y.min(v.y));
                    hi = Vec2::new(hi.x.max(v.x), hi.y.max(v.y));
                }
                (lo, hi, vertices[0])
            }
            DomainShape::Point { .. } => unreachable!(),
        };
        let count = (hi - lo).x.max((hi - lo).y) / spacing;
        if count > 4096.0 {
            return Err(Error::Resource {
                required: count.ceil() as u64,
                limit: 4096,
            });
        }
        let range = |lo: f64, hi: f64, anchor: f64| {
            let first = ((lo - anchor) / spacing - 1e-9).ceil() as i64;
            let last = ((hi - anchor) / spacing + 1e-9).floor() as i64;
            first..=last
        };
        let mut samples = Vec::new();
        for j in range(lo.y, hi.y, anchor.y) {
            for i in range(lo.x, hi.x, anchor.x) {
                let p = anchor + Vec2::new(i as f64 * spacing, j as f64 * spacing);
                if shape.contains(p) {
                    samples.push(p);
                }
            }
        }
        let mut edge = Vec::new();
        match &shape {
            DomainShape::Disc { center, radius } => {
                let n = ((2.0 * PI * radius / spacing).ceil() as usize).max(8);
                for k in 0..n {
                    edge.push(*center + Vec2::from_polar(*radius, 2.0 * PI * k as f64 / n as f64));
                }
            }
            DomainShape::Rectangle { min, max } => {
                let c = [*min, Vec2::new(max.x, min.y), *max, Vec2::new(min.x, max.y)];
                for k in 0..4 {
                    boundary_samples(c[k], c[(k + 1) % 4], spacing, &mut edge);
                }
            }
            DomainShape::Polygon { vertices } => {
                for k in 0..vertices.len() {
                    boundary_samples(
                        vertices[k],
                        vertices[(k + 1) % vertices.len()],
                        spacing,
                        &mut edge,
                    );
                }
            }
            DomainShape::Point { .. } => {}
        }
        let min_gap = 1e-9 * spacing;
        for p in edge {
            if samples.iter().all(|q| (*q - p).norm() > min_gap) {
                samples.push(p);
            }
        }
        Ok(Self {
            shape,
            sample_spacing: spacing,
            samples,
        })
    }

    /// Explicit sample set; every sample must lie in the shape.
    pub fn from_samples(shape: DomainShape, samples: Vec<Vec2>) -> Result<Self> {
        shape.validate()?;
        if samples.is_empty() {
            return Err(Error::Parameter("operating domain needs samples".into()));
        }
        if let Some(p) = samples.iter().find(|p| !shape.contains(**p)) {
            return Err(Error::Parameter(format!(
                "sample ({}, {}) lies outside the domain",
                p.x, p.y
            )));
        }
        // largest nearest-neighbour distance stands in for the lattice step
        let mut spacing: f64 = 0.0;
        for (i, a) in samples.iter().enumerate() {
            let nearest = samples
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != i)
                .map(|(_, b)| (*a - *b).norm())
                .fold(f64::INFINITY, f64::min);
            if nearest.is_finite() {
                spacing = spacing.max(nearest);
            }
        }
        Ok(Self {
            shape,
            sample_spacing: spacing,
            samples,
        })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn confidence(&self) -> Confidence {
        let d = self.shape.diameter();
        if d == 0.0 || self.sample_spacing <= d * MAX_RELATIVE_SAMPLE_SPACING {
            Confidence::Adequate
        } else {
            Confidence::UnderSampled
        }
    }
}

/// Whether the domain samples are dense enough to trust a verdict.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Confidence {
    Adequate,
    UnderSampled,
}

/// Sample pair with the largest band limit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WorstPair {
    pub tested: Vec2,
    pub source: Vec2,
    #[serde(rename = "K")]
    pub k: f64,
}

fn worst_pair(kfn: &dyn BandLimitFn, samples: &[Vec2]) -> Result<Option<WorstPair>> {
    let symmetric = kfn.symmetric();
    let n = samples.len();
    let rows: Vec<Option<(usize, usize, f64)>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut best: Option<(usize, usize, f64)> = None;
            let js = if symmetric { i + 1..n } else { 0..n };
            for j in js.filter(|&j| j != i) {
                let k = kfn.band_limit(samples[i], samples[j])?;
                if best.is_none_or(|b| k > b.2) {
                    best = Some((i, j, k));
                }
            }
            Ok(best)
        })
        .collect::<Result<_>>()?;
    let best = rows
        .into_iter()
        .flatten()
        .fold(None::<(usize, usize, f64)>, |acc, r| match acc {
            Some(a) if a.2 >= r.2 => Some(a),
            _ => Some(r),
        });
    Ok(best.map(|(i, j, k)| WorstPair {
        tested: samples[i],
        source: samples[j],
        k,
    }))
}

/// ASOD verdict for one spacing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AsodVerdict {
    pub aliasing_safe: bool,
    pub spacing: f64,
    pub level: f64,
    pub worst_pair: Option<WorstPair>,
    pub samples: usize,
    pub sample_spacing: f64,
    pub confidence: Confidence,
    pub method: String,
}

/// Checks `K(x̃, x) ≤ 2π/Δ` over every pair of domain samples.
pub fn asod_check(
    kfn: &dyn BandLimitFn,
    domain: &OperatingDomain,
    spacing: f64,
) -> Result<AsodVerdict> {
    let level = level(spacing)?;
    let worst = worst_pair(kfn, &domain.samples)?;
    Ok(AsodVerdict {
        aliasing_safe: worst.is_none_or(|w| w.k <= level * (1.0 + LEVEL_RTOL)),
        spacing,
        level,
        worst_pair: worst,
        samples: domain.len(),
        sample_spacing: domain.sample_spacing,
        confidence: domain.confidence(),
        method: kfn.label(),
    })
}

/// Largest spacing for which the sampled domain is aliasing safe.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SafeSpacing {
    /// `2π / max K`; infinite when no pair constrains the spacing.
    pub spacing: f64,
    pub unbounded: bool,
    pub worst_pair: Option<WorstPair>,
    pub confidence: Confidence,
}

/// `Δ* = 2π / max K` over the sample pairs.
pub fn max_safe_spacing(kfn: &dyn BandLimitFn, domain: &OperatingDomain) -> Result<SafeSpacing> {
    let worst = worst_pair(kfn, &domain.samples)?;
    let k = worst.map_or(0.0, |w| w.k);
    Ok(SafeSpacing {
        spacing: if k > 0.0 { 2.0 * PI / k } else { f64::INFINITY },
        unbounded: k <= 0.0,
        worst_pair: worst,
        confidence: domain.confidence(),
    })
}

/// A pair where the supposedly larger band limit is smaller.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InclusionViolation {
    pub index: usize,
    pub k_inner: f64,
    pub k_outer: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InclusionReport {
    pub pairs: usize,
    pub violations: Vec<InclusionViolation>,
    /// Largest `K_inner / K_outer` over pairs with `K_outer > 0`.
    pub max_ratio: f64,
}

impl InclusionReport {
    pub fn holds(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Verifies `K_outer ≥ K_inner` on every pair, the premise under which the
/// AFRs (and ASODs) of `outer` are contained in those of `inner`.
pub fn inclusion_audit(
    inner: &dyn BandLimitFn,
    outer: &dyn BandLimitFn,
    pairs: &[(Vec2, Vec2)],
) -> Result<InclusionReport> {
    let values: Vec<(f64, f64)> = pairs
        .par_iter()
        .map(|&(t, s)| Ok((inner.band_limit(t, s)?, outer.band_limit(t, s)?)))
        .collect::<Result<_>>()?;
    let mut violations = Vec::new();
    let mut max_ratio: f64 = 0.0;
    for (index, &(k_inner, k_outer)) in values.iter().enumerate() {
        if k_outer > 0.0 {
            max_ratio = max_ratio.max(k_inner / k_outer);
        }
        if k_outer < k_inner * (1.0 - LEVEL_RTOL) {
            violations.push(InclusionViolation {
                index,
                k_inner,
                k_outer,
            });
        }
    }
    Ok(InclusionReport {
        pairs: pairs.len(),
        violations,
        max_ratio,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::closedform::eye_geometry;
    use crate::geometry::{half_wavelength_check, sample_grid, Alignment};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn phys() -> PhysicalConfig {
        PhysicalConfig::normalized()
    }

    fn ula_cf(len: f64) -> UlaClosedForm {
        UlaClosedForm::new(&ParametricCurve::ula(len).unwrap(), phys(), true).unwrap()
    }

    #[test]
    fn membership_examples() {
        let k = ula_cf(1000.0);
        let s = Vec2::new(0.0, 600.0);
        assert!(is_aliasing_free(&k, s, s, 1e3).unwrap());
        assert!(is_aliasing_free(&k, Vec2::new(0.0, 700.0), s, 10.0).unwrap());
        let u = UcaClosedForm::new(PI, phys()).unwrap();
        let s = Vec2::new(2.0, -1.0);
        assert!(!is_aliasing_free(&u, s + Vec2::new(40.0, 0.0), s, 2.0 * PI / 200.0).unwrap());
        assert!(is_aliasing_free(&u, s + Vec2::new(30.0, 0.0), s, 2.0 * PI / 200.0).unwrap());
    }

    #[test]
    fn closed_form_ula_respects_array_pose() {
        let curve = ParametricCurve::ula_with(300.0, Vec2::new(5.0, -2.0), 0.7).unwrap();
        let ParametricCurve::Ula(ula) = curve else {
            unreachable!()
        };
        let cf = UlaClosedForm::new(&curve, phys(), true).unwrap();
        let num = NumericBandLimit::new(curve.clone(), phys());
        let (t, s) = (
            ula.to_world(Vec2::new(20.0, 40.0)),
            ula.to_world(Vec2::new(-30.0, 25.0)),
        );
        let a = cf.band_limit(t, s).unwrap();
        let b = num.band_limit(t, s).unwrap();
        assert!((a - b).abs() < 1e-6 * b);
    }

    #[test]
    fn ula_contour_matches_scaled_eye() {
        let k = UlaClosedForm::new(&ParametricCurve::ula(1e6).unwrap(), phys(), false).unwrap();
        let s = Vec2::new(0.0, 600.0);
        let eye = eye_geometry(10.0).unwrap();
        let region = Region::new((-100.0, 100.0), (400.0, 850.0), 81, 121).unwrap();
        let c = afr_contour(&k, s, 10.0, &region).unwrap();
        assert_eq!(c.status, ContourStatus::Boundary);
        assert_eq!(c.polylines.len(), 1);
        assert!(c.polylines[0].closed);
        assert!(c.max_level_error <= CONTOUR_LEVEL_TOL);
        // crossings of the vertical axis and of the line ỹ = y
        let pts = &c.polylines[0].points;
        let near = |target: Vec2| {
            pts.iter()
                .map(|p| (*p - target).norm())
                .fold(f64::INFINITY, f64::min)
        };
        let top = Vec2::new(0.0, 600.0 * eye.h_plus);
        let bottom = Vec2::new(0.0, 600.0 * eye.h_minus);
        let right = Vec2::new(600.0 * eye.width, 600.0);
        for target in [top, bottom, right] {
            let on_grid = near(target);
            assert!(on_grid < 5.0, "{target:?} {on_grid}");
        }
        for p in pts {
            let v = k.band_limit(*p, s).unwrap();
            assert!((v - c.level).abs() <= 1e-3 * c.level);
        }
    }

    #[test]
    fn uca_contour_is_a_circle() {
        let u = UcaClosedForm::new(PI, phys()).unwrap();
        let spacing = 2.0 * PI / 200.0;
        let region = Region::new((-50.0, 50.0), (-50.0, 50.0), 101, 101).unwrap();
        let c = afr_contour(&u, Vec2::ZERO, spacing, &region).unwrap();
        assert_eq!(c.polylines.len(), 1);
        let r0 = 1.0 / spacing;
        for p in &c.polylines[0].points {
            assert!((p.norm() - r0).abs() <= region.dx());
        }
    }

    #[test]
    fn dense_spacing_is_all_free() {
        let k = ula_cf(100.0);
        let region = Region::new((-50.0, 50.0), (1.0, 60.0), 16, 16).unwrap();
        let c = afr_contour(&k, Vec2::new(0.0, 30.0), 0.5, &region).unwrap();
        assert_eq!(c.status, ContourStatus::AllFree);
        assert!(c.polylines.is_empty());
        assert!(afr_contour(
            &k,
            Vec2::new(0.0, 30.0),
            0.5,
            &Region::new((-1.0, 1.0), (1.0, 2.0), 8, 8).unwrap()
        )
        .is_err());
    }

    #[test]
    fn region_crossing_the_array_is_masked() {
        let k = ula_cf(100.0);
        let region = Region::new((-20.0, 20.0), (-20.0, 20.0), 21, 21).unwrap();
        let c = afr_contour(&k, Vec2::new(0.0, 5.0), 10.0, &region).unwrap();
        assert_eq!(c.masked_nodes, 21);
    }

    #[test]
    fn asod_examples() {
        let k = ula_cf(1000.0);
        let point = OperatingDomain::sample(
            DomainShape::Point {
                at: Vec2::new(0.0, 600.0),
            },
            1.0,
        )
        .unwrap();
        let v = asod_check(&k, &point, 10.0).unwrap();
        assert!(v.aliasing_safe && v.worst_pair.is_none());
        let s = max_safe_spacing(&k, &point).unwrap();
        assert!(s.unbounded && s.spacing.is_infinite());

        let disc = OperatingDomain::sample(
            DomainShape::Disc {
                center: Vec2::new(0.0, 600.0),
                radius: 10.0,
            },
            1.0,
        )
        .unwrap();
        assert_eq!(disc.confidence(), Confidence::Adequate);
        assert!(disc.samples.iter().all(|p| disc.shape.contains(*p)));
        assert!(asod_check(&k, &disc, 10.0).unwrap().aliasing_safe);
        let bad = asod_check(&k, &disc, 100.0).unwrap();
        assert!(!bad.aliasing_safe);
        let w = bad.worst_pair.unwrap();
        assert!(w.k > bad.level);

        let star = max_safe_spacing(&k, &disc).unwrap();
        assert!(asod_check(&k, &disc, star.spacing).unwrap().aliasing_safe);
        assert!(
            !asod_check(&k, &disc, 1.01 * star.spacing)
                .unwrap()
                .aliasing_safe
        );
    }

    #[test]
    fn uca_disc_safe_spacing_is_diameter_bound() {
        let u = UcaClosedForm::new(PI, phys()).unwrap();
        let r = 5.0;
        let disc = OperatingDomain::sample(
            DomainShape::Disc {
                center: Vec2::ZERO,
                radius: r,
            },
            0.5,
        )
        .unwrap();
        let star = max_safe_spacing(&u, &disc).unwrap();
        assert!((star.spacing - 1.0 / (2.0 * r)).abs() < 1e-12);
    }

    #[test]
    fn under_sampling_is_flagged() {
        let k = ula_cf(1000.0);
        let disc = OperatingDomain::sample(
            DomainShape::Disc {
                center: Vec2::new(0.0, 600.0),
                radius: 10.0,
            },
            5.0,
        )
        .unwrap();
        assert_eq!(
            asod_check(&k, &disc, 10.0).unwrap().confidence,
            Confidence::UnderSampled
        );
    }

    #[test]
    fn shapes_sample_inside() {
        let rect = OperatingDomain::sample(
            DomainShape::Rectangle {
                min: Vec2::new(-1.0, 2.0),
                max: Vec2::new(3.0, 4.0),
            },
            0.5,
        )
        .unwrap();
        assert_eq!(rect.len(), 9 * 5);
        let tri = DomainShape::Polygon {
            vertices: vec![
                Vec2::new(0.0, 0.0),
                Vec2::new(4.0, 0.0),
                Vec2::new(0.0, 4.0),
            ],
        };
        let poly = OperatingDomain::sample(tri.clone(), 0.5).unwrap();
        assert!(poly.len() >= 2);
        assert!(poly.samples.iter().all(|p| tri.contains(*p)));
        assert!(!tri.contains(Vec2::new(3.0, 3.0)));
        assert!(OperatingDomain::from_samples(tri, vec![Vec2::new(5.0, 5.0)]).is_err());
    }

    #[test]
    fn inclusion_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let pairs: Vec<(Vec2, Vec2)> = (0..1000)
            .map(|_| {
                let mut p = || Vec2::new(rng.gen_range(-800.0..800.0), rng.gen_range(1.0..800.0));
                (p(), p())
            })
            .collect();
        let r = inclusion_audit(&ula_cf(200.0), &ula_cf(1000.0), &pairs).unwrap();
        assert!(r.holds());
        let same = inclusion_audit(&ula_cf(200.0), &ula_cf(200.0), &pairs).unwrap();
        assert!(same.holds() && same.max_ratio == 1.0);

        let upairs: Vec<(Vec2, Vec2)> = pairs.iter().map(|&(a, b)| (a * 0.01, b * 0.01)).collect();
        let arc = UcaClosedForm::new(0.3 * PI, phys()).unwrap();
        let circle = UcaClosedForm::new(PI, phys()).unwrap();
        assert!(inclusion_audit(&arc, &circle, &upairs).unwrap().holds());
        assert!(!inclusion_audit(&circle, &arc, &upairs).unwrap().holds());
    }

    #[test]
    fn half_wavelength_grids_are_always_safe() {
        let curve = ParametricCurve::ula(200.0).unwrap();
        let grid = sample_grid(&curve, 0.5, Alignment::Centered).unwrap();
        assert!(half_wavelength_check(&grid, &phys()).unwrap().satisfied);
        let k = UlaClosedForm::new(&curve, phys(), true).unwrap();
        let dom = OperatingDomain::sample(
            DomainShape::Rectangle {
                min: Vec2::new(-500.0, 0.5),
                max: Vec2::new(500.0, 300.0),
            },
            25.0,
        )
        .unwrap();
        assert!(asod_check(&k, &dom, grid.spacing()).unwrap().aliasing_safe);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn asod_verdict_is_monotone(cx in -200.0f64..200.0, cy in 50.0f64..500.0, r in 1.0f64..30.0, d1 in 0.5f64..50.0, f in 0.0f64..1.0) {
            let k = ula_cf(400.0);
            let dom = OperatingDomain::sample(DomainShape::Disc { center: Vec2::new(cx, cy), radius: r }, r / 4.0).unwrap();
            let v1 = asod_check(&k, &dom, d1).unwrap();
            let v2 = asod_check(&k, &dom, d1 * f.max(1e-3)).unwrap();
            prop_assert!(!v1.aliasing_safe || v2.aliasing_safe);
        }
    }
}
