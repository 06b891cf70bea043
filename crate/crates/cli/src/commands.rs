//! Subcommand implementations. Each writes its artifacts plus
//! `manifest.json` into the output directory.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use nfalias::afr::{
    afr_contour, asod_check, max_safe_spacing, BandLimitFn, NumericBandLimit, OperatingDomain,
    UcaClosedForm, UlaClosedForm, CONTOUR_LEVEL_TOL, LEVEL_RTOL,
};
use nfalias::ambiguity::{af_grid, AfGridResult, AfKind, Region};
use nfalias::closedform::{
    afr_ula_from_eye, eye_geometry, k_finite_ula, k_inf_ula, k_uca_with_radius,
    UCA_VALIDITY_THRESHOLD, U_SINGULAR_TOL,
};
use nfalias::field::SINGULARITY_GUARD;
use nfalias::io::{
    af_grid_metadata, contour_geojson, write_af_grid_csv, write_contour_csv, write_spectrum_csv,
};
use nfalias::spectral::{
    frequency_grid, matched_spectrum, soft_band_limit_numeric, strict_band_limit,
};
use nfalias::{MatchedSignalContext, ParametricCurve};
use serde_json::{json, Value};

use crate::config::{BandLimitSource, Scenario};
use crate::{CliError, Command, Options};

struct Output<'a> {
    dir: &'a Path,
    files: Vec<PathBuf>,
}

impl<'a> Output<'a> {
    fn create(&mut self, name: &str) -> Result<BufWriter<File>, CliError> {
        let path = self.dir.join(name);
        let file = File::create(&path)?;
        self.files.push(path);
        Ok(BufWriter::new(file))
    }

    fn json(&mut self, name: &str, value: &Value) -> Result<(), CliError> {
        let mut w = self.create(name)?;
        serde_json::to_writer_pretty(&mut w, value).map_err(std::io::Error::from)?;
        w.write_all(b"\n")?;
        w.flush()?;
        Ok(())
    }

    fn names(&self) -> Vec<String> {
        self.files
            .iter()
            .filter_map(|p| p.file_name().map(|n| n.to_string_lossy().into_owned()))
            .collect()
    }
}

pub fn run(command: Command, s: &Scenario, opts: &Options) -> Result<Vec<PathBuf>, CliError> {
    let mut out = Output {
        dir: &opts.out,
        files: Vec::new(),
    };
    match command {
        Command::Af => af(s, opts, &mut out)?,
        Command::Spectrum => spectrum(s, &mut out)?,
        Command::Bandlimit => bandlimit(s, &mut out)?,
        Command::Afr => afr(s, opts, &mut out)?,
        Command::Eye => eye(s, &mut out)?,
        Command::Asod => asod(s, &mut out)?,
    }
    let manifest = manifest(command, s, opts, out.names());
    out.json("manifest.json", &manifest)?;
    Ok(out.files)
}

fn manifest(command: Command, s: &Scenario, opts: &Options, outputs: Vec<String>) -> Value {
    let t = &s.raw.tolerances;
    json!({
        "tool": "nfalias",
        "version": env!("CARGO_PKG_VERSION"),
        "command": command.name(),
        "schema_version": s.raw.schema_version,
        "config_sha256": s.sha256,
        "length_unit": "wavelength",
        "config_wavelength": s.wavelength,
        "overrides": {
            "resolution": opts.resolution,
            "continuous": opts.continuous,
        },
        "tolerances": {
            "quadrature": t.quadrature,
            "af_threshold": t.af_threshold,
            "band_epsilon": t.band_epsilon,
            "level_rtol": LEVEL_RTOL,
            "contour_level_tol": CONTOUR_LEVEL_TOL,
            "singularity_guard": SINGULARITY_GUARD,
            "u_singular_tol": U_SINGULAR_TOL,
            "uca_validity_threshold": UCA_VALIDITY_THRESHOLD,
        },
        "outputs": outputs,
    })
}

fn region(s: &Scenario, opts: &Options) -> Result<Region, CliError> {
    let r = s.region()?;
    match opts.resolution {
        Some(n) => Ok(Region::new((r.x_min, r.x_max), (r.y_min, r.y_max), n, n)?),
        None => Ok(r),
    }
}

fn band_limit_fn(
    s: &Scenario,
    method: BandLimitSource,
    infinite: bool,
) -> Result<Box<dyn BandLimitFn>, CliError> {
    Ok(match (method, &s.curve) {
        (BandLimitSource::Numeric, curve) => Box::new(NumericBandLimit::new(curve.clone(), s.phys)),
        (BandLimitSource::ClosedForm, curve @ ParametricCurve::Ula(_)) => {
            Box::new(UlaClosedForm::new(curve, s.phys, !infinite)?)
        }
        (BandLimitSource::ClosedForm, curve @ ParametricCurve::UcaArc(_)) => {
            Box::new(UcaClosedForm::from_curve(curve, s.phys)?)
        }
        (BandLimitSource::ClosedForm, ParametricCurve::Custom(_)) => {
            return Err(CliError::Config(
                "no closed-form band limit for a custom curve; use method = \"numeric\"".into(),
            ))
        }
    })
}

fn grid_summary(grid: &AfGridResult) -> Value {
    let mut meta = af_grid_metadata(grid);
    if let Some(((i, j), v)) = grid.argmax() {
        meta["argmax"] = json!({
            "node": [i, j],
            "location": grid.region.node(i, j),
            "abs": v.norm(),
        });
    }
    meta
}

fn af(s: &Scenario, opts: &Options, out: &mut Output) -> Result<(), CliError> {
    let source = s.source()?;
    let region = region(s, opts)?;
    let discrete = af_grid(
        &s.curve,
        &s.phys,
        Some(&s.grid),
        source,
        &region,
        AfKind::Discrete,
    )?;
    write_af_grid_csv(&discrete, out.create("af_discrete.csv")?)?;
    out.json("af_discrete.json", &grid_summary(&discrete))?;

    if opts.continuous {
        let rule = s.raw.tolerances.quadrature;
        let continuous = af_grid(
            &s.curve,
            &s.phys,
            None,
            source,
            &region,
            AfKind::Continuous(rule),
        )?;
        write_af_grid_csv(&continuous, out.create("af_continuous.csv")?)?;
        let threshold = s.raw.tolerances.af_threshold;
        let diffs: Vec<f64> = discrete
            .values
            .iter()
            .zip(&continuous.values)
            .zip(&discrete.masked)
            .filter(|(_, m)| !**m)
            .map(|((a, b), _)| (a - b).norm())
            .collect();
        let mut meta = grid_summary(&continuous);
        meta["discrepancy"] = json!({
            "max": diffs.iter().copied().fold(0.0, f64::max),
            "threshold": threshold,
            "nodes_above_threshold": diffs.iter().filter(|d| **d > threshold).count(),
        });
        out.json("af_continuous.json", &meta)?;
    }
    Ok(())
}

fn spectrum(s: &Scenario, out: &mut Output) -> Result<(), CliError> {
    let source = s.source()?;
    let cfg = s.raw.spectrum.clone().unwrap_or_default();
    let fold = 2.0 * std::f64::consts::PI / s.spacing();
    let omega = frequency_grid(-cfg.span * fold, cfg.span * fold, cfg.samples)?;
    let mut entries = Vec::new();
    for (i, &tested) in s.tested()?.iter().enumerate() {
        let ctx = MatchedSignalContext::new(&s.curve, s.phys, tested, source)?;
        let samples = matched_spectrum(&ctx, &omega)?;
        let name = format!("spectrum_{i}.csv");
        write_spectrum_csv(&samples, out.create(&name)?)?;
        let numeric = soft_band_limit_numeric(&ctx);
        entries.push(json!({
            "file": name,
            "tested": tested,
            "source": source,
            "signal_energy": samples.signal_energy,
            "max_abs": samples.max_abs(),
            "strict_band_limit": strict_band_limit(&samples, s.raw.tolerances.band_epsilon)?,
            "soft_band_limit": numeric,
            "folding_frequency": fold,
            "parseval_residual": samples.parseval_residual(),
        }));
    }
    out.json("spectrum.json", &json!({ "spectra": entries }))
}

fn bandlimit(s: &Scenario, out: &mut Output) -> Result<(), CliError> {
    let source = s.source()?;
    let mut entries = Vec::new();
    for &tested in s.tested()? {
        let ctx = MatchedSignalContext::new(&s.curve, s.phys, tested, source)?;
        let numeric = soft_band_limit_numeric(&ctx);
        let (closed, extra, k) = match &s.curve {
            ParametricCurve::Ula(ula) => {
                let (t, x) = (ula.to_local(tested), ula.to_local(source));
                let finite = k_finite_ula(ula.length(), t, x, &s.phys)?;
                let infinite = k_inf_ula(t, x, &s.phys)?;
                (
                    json!(finite),
                    json!({ "infinite_array": infinite }),
                    finite.k,
                )
            }
            ParametricCurve::UcaArc(arc) => {
                let r =
                    k_uca_with_radius(tested, source, arc.half_aperture(), arc.radius(), &s.phys)?;
                (json!(r), json!({ "valid": r.is_valid() }), r.k)
            }
            ParametricCurve::Custom(_) => (Value::Null, Value::Null, f64::NAN),
        };
        let deviation = if numeric.k > 0.0 {
            Some((k - numeric.k).abs() / numeric.k)
        } else {
            None
        };
        entries.push(json!({
            "tested": tested,
            "source": source,
            "closed_form": closed,
            "closed_form_extra": extra,
            "numeric": numeric,
            "relative_deviation": deviation.filter(|d| d.is_finite()),
        }));
    }
    out.json("bandlimit.json", &json!({ "pairs": entries }))
}

fn afr(s: &Scenario, opts: &Options, out: &mut Output) -> Result<(), CliError> {
    let source = s.source()?;
    let region = region(s, opts)?;
    let cfg = s.raw.afr.clone().unwrap_or_default();
    let kfn = band_limit_fn(s, cfg.method, cfg.infinite)?;
    let contour = afr_contour(kfn.as_ref(), source, s.spacing(), &region)?;
    write_contour_csv(&contour, out.create("afr_contour.csv")?)?;
    out.json("afr_contour.geojson", &contour_geojson(&contour))
}

fn eye(s: &Scenario, out: &mut Output) -> Result<(), CliError> {
    let ula = match &s.curve {
        ParametricCurve::Ula(ula) => Some(ula),
        _ => None,
    };
    let delta = match (s.raw.eye.as_ref().and_then(|e| e.delta), ula) {
        (Some(d), _) => d,
        (None, Some(_)) => s.spacing() / s.phys.wavelength(),
        (None, None) => {
            return Err(CliError::Config(
                "`eye.delta` is required unless the array is a ULA".into(),
            ))
        }
    };
    let eye = eye_geometry(delta)?;
    let mut value = json!({
        "delta": eye.delta,
        "w_eye": eye.width,
        "h_plus": eye.h_plus,
        "h_minus": eye.h_minus,
        "degenerate": eye.degenerate,
        "unbounded": eye.unbounded,
    });
    if let (Some(ula), Some(source)) = (ula, s.source) {
        let t = afr_ula_from_eye(ula.to_local(source), delta * s.phys.wavelength(), &s.phys)?;
        value["afr_transform"] = json!({
            "frame": "array",
            "scale": t.scale,
            "shift": t.shift,
        });
    }
    out.json("eye.json", &value)
}

fn asod(s: &Scenario, out: &mut Output) -> Result<(), CliError> {
    let cfg = s
        .raw
        .asod
        .as_ref()
        .ok_or_else(|| CliError::Config("`asod`: section required by this command".into()))?;
    let (shape, spacing) = s.domain.clone().expect("asod section present");
    let domain = OperatingDomain::sample(shape, spacing)?;
    let kfn = band_limit_fn(s, cfg.method, false)?;
    let check = asod_check(kfn.as_ref(), &domain, s.spacing())?;
    let safe = max_safe_spacing(kfn.as_ref(), &domain)?;
    out.json(
        "asod.json",
        &json!({
            "verdict": check.aliasing_safe,
            "check": check,
            "safe_spacing": safe,
        }),
    )
}
