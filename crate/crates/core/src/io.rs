//! CSV and JSON serialization of results.
//!
//! CSV files are comma separated with a header row and LF line endings.
//! Floats use Rust's shortest round-trip formatting, so rewriting identical
//! results yields identical bytes.

use std::io::Write;

use serde_json::{json, Value};

use crate::afr::AfrContour;
use crate::ambiguity::AfGridResult;
use crate::spectral::SpectrumSamples;

/// Floor of the `abs_db` convenience column.
pub const DB_FLOOR: f64 = -120.0;

fn writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(w)
}

fn to_io(e: csv::Error) -> std::io::Error {
    match e.into_kind() {
        csv::ErrorKind::Io(e) => e,
        other => std::io::Error::other(format!("{other:?}")),
    }
}

/// `20·log10(|z|)`, floored at [`DB_FLOOR`].
pub fn to_db(abs: f64) -> f64 {
    if abs > 0.0 {
        (20.0 * abs.log10()).max(DB_FLOOR)
    } else {
        DB_FLOOR
    }
}

/// Rows `x,y,re,im,abs,masked` in row-major node order.
pub fn write_af_grid_csv<W: Write>(grid: &AfGridResult, w: W) -> std::io::Result<()> {
    let mut out = writer(w);
    out.write_record(["x", "y", "re", "im", "abs", "masked"])
        .map_err(to_io)?;
    for (idx, p) in grid.region.nodes().enumerate() {
        let v = grid.values[idx];
        out.write_record([
            p.x.to_string(),
            p.y.to_string(),
            v.re.to_string(),
            v.im.to_string(),
            v.norm().to_string(),
            grid.masked[idx].to_string(),
        ])
        .map_err(to_io)?;
    }
    out.flush()
}

/// Metadata sidecar for an AF grid.
pub fn af_grid_metadata(grid: &AfGridResult) -> Value {
    json!({
        "region": grid.region,
        "source": grid.source,
        "kind": grid.kind,
        "spacing": grid.spacing,
        "curve": grid.curve,
        "masked_nodes": grid.masked.iter().filter(|m| **m).count(),
    })
}

/// Rows `omega,re,im,abs_db`.
pub fn write_spectrum_csv<W: Write>(spectrum: &SpectrumSamples, w: W) -> std::io::Result<()> {
    let mut out = writer(w);
    out.write_record(["omega", "re", "im", "abs_db"])
        .map_err(to_io)?;
    for (omega, v) in spectrum.omega.iter().zip(&spectrum.values) {
        out.write_record([
            omega.to_string(),
            v.re.to_string(),
            v.im.to_string(),
            to_db(v.norm()).to_string(),
        ])
        .map_err(to_io)?;
    }
    out.flush()
}

/// Rows `polyline_id,vertex_index,x,y`. Closed polylines repeat their first
/// vertex at the end.
pub fn write_contour_csv<W: Write>(contour: &AfrContour, w: W) -> std::io::Result<()> {
    let mut out = writer(w);
    out.write_record(["polyline_id", "vertex_index", "x", "y"])
        .map_err(to_io)?;
    for (id, line) in contour.polylines.iter().enumerate() {
        let extra = line.closed.then(|| line.points[0]);
        for (k, p) in line.points.iter().chain(extra.iter()).enumerate() {
            out.write_record([
                id.to_string(),
                k.to_string(),
                p.x.to_string(),
                p.y.to_string(),
            ])
            .map_err(to_io)?;
        }
    }
    out.flush()
}

/// GeoJSON-style feature collection: closed polylines become polygons,
/// open ones line strings.
pub fn contour_geojson(contour: &AfrContour) -> Value {
    let features: Vec<Value> = contour
        .polylines
        .iter()
        .enumerate()
        .map(|(id, line)| {
            let mut coords: Vec<[f64; 2]> = line.points.iter().map(|p| [p.x, p.y]).collect();
            let geometry = if line.closed {
                coords.push(coords[0]);
                json!({ "type": "Polygon", "coordinates": [coords] })
            } else {
                json!({ "type": "LineString", "coordinates": coords })
            };
            json!({
                "type": "Feature",
                "id": id,
                "geometry": geometry,
                "properties": { "closed": line.closed },
            })
        })
        .collect();
    json!({
        "type": "FeatureCollection",
        "features": features,
        "properties": {
            "source": contour.source,
            "spacing": contour.spacing,
            "level": contour.level,
            "method": contour.method,
            "status": contour.status,
            "resolution": [contour.region.nx, contour.region.ny],
            "masked_nodes": contour.masked_nodes,
            "max_level_error": contour.max_level_error,
        },
    })
}
