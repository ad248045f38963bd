use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use log::info;
use qls_core::json::{system_from_value, system_to_json, to_canonical_string};
use qls_core::spectrum::{default_stability_margin, spectral_abscissa};
use qls_core::{
    example_cascade_default, example_optomech_default, random_realizable_with_outputs, System,
};
use qls_h2::{
    freq_response_export, h2_norm_gramian, h2_norm_quadrature, Channel, FrequencyGrid,
    QuadratureSpec,
};
use qls_reduce::{Method, Provenance, ReduceError, ReduceOptions, ReductionResult};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::args::{BodeArgs, CheckArgs, ExampleArg, GenArgs, H2Args, MethodArg, ReduceArgs};
use crate::report::reduction_report;
use crate::CliError;

fn io_fail(path: &Path, e: std::io::Error) -> CliError {
    CliError::Failed(format!("{}: {e}", path.display()))
}

fn emit(out: &mut dyn Write, text: &str) -> Result<(), CliError> {
    out.write_all(text.as_bytes())
        .map_err(|e| CliError::Failed(format!("stdout: {e}")))
}

/// Reads a system file, or the `reduced` member of a reduction result file.
pub fn load_system(path: &Path) -> Result<(System, Vec<u8>), CliError> {
    let bytes = fs::read(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    let text = std::str::from_utf8(&bytes)
        .map_err(|_| CliError::Usage(format!("{}: not UTF-8", path.display())))?;
    let mut value: Value = serde_json::from_str(text)
        .map_err(|e| CliError::Usage(format!("{}: malformed JSON: {e}", path.display())))?;
    if let Some(inner) = value.get_mut("reduced") {
        value = inner.take();
    }
    let sys = system_from_value(value)
        .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    Ok((sys, bytes))
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|e| io_fail(path, e))
}

pub fn check(a: &CheckArgs, out: &mut dyn Write) -> Result<bool, CliError> {
    let (sys, _) = load_system(&a.input)?;
    let scale = sys.block_scale();
    let tol = a.tol_real * scale;
    let real = sys.realizability_residuals();
    let realizable = real.max() <= tol;
    let passive = sys.passive_residuals().ok();
    let abscissa = spectral_abscissa(sys.a());
    let margin = default_stability_margin(sys.a());
    let stable = abscissa < -margin;
    let ok = realizable && stable;
    if a.json {
        let v = json!({
            "n": sys.n(), "m": sys.m(), "l": sys.l(),
            "realizability": [real.r1, real.r2, real.r3],
            "realizable": realizable,
            "tolerance": tol,
            "passive": passive.map(|p| json!([p.p1, p.p2, p.p3])),
            "abscissa": abscissa,
            "stable": stable,
            "ok": ok,
        });
        emit(out, &to_canonical_string(&v))?;
    } else {
        let mut s = format!(
            "system: n={} modes, m={} inputs, l={} outputs\n",
            sys.n(),
            sys.m(),
            sys.l()
        );
        s += &format!(
            "realizability residuals: {:.3e} {:.3e} {:.3e} (tolerance {:.3e}) {}\n",
            real.r1,
            real.r2,
            real.r3,
            tol,
            if realizable { "ok" } else { "FAIL" }
        );
        if let Some(p) = passive {
            s += &format!(
                "passive residuals: {:.3e} {:.3e} {:.3e}\n",
                p.p1, p.p2, p.p3
            );
        }
        s += &format!(
            "spectral abscissa: {abscissa:.6e} Hz ({})\n",
            if stable { "Hurwitz" } else { "NOT Hurwitz" }
        );
        emit(out, &s)?;
    }
    Ok(ok)
}

pub fn options_from(a: &ReduceArgs) -> Result<ReduceOptions<f64>, CliError> {
    for (name, v) in [
        ("--tol-real", a.tol_real),
        ("--tol-eq", a.tol_eq),
        ("--eps", a.eps),
    ] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(CliError::Usage(format!("{name} must be positive, got {v}")));
        }
    }
    Ok(ReduceOptions {
        eps: a.eps,
        tol_real: a.tol_real,
        tol_eq: a.tol_eq,
        max_iter: a.max_iter,
        seed: a.seed,
        max_candidates: a.max_candidates,
        ..ReduceOptions::default()
    })
}

fn map_reduce_error(e: ReduceError) -> CliError {
    match e {
        ReduceError::Order { .. }
        | ReduceError::NotRealizable { .. }
        | ReduceError::NotPassive { .. } => CliError::Usage(format!("precondition: {e}")),
        ReduceError::System(_) => CliError::Usage(e.to_string()),
        other => CliError::Failed(other.to_string()),
    }
}

fn bode_path(a: &ReduceArgs) -> Option<PathBuf> {
    a.bode
        .clone()
        .or_else(|| a.out.as_ref().map(|p| p.with_extension("bode.csv")))
}

pub fn reduce(a: &ReduceArgs, out: &mut dyn Write) -> Result<bool, CliError> {
    let (full, bytes) = load_system(&a.input)?;
    let opts = options_from(a)?;
    if a.grid.is_some() && bode_path(a).is_none() {
        return Err(CliError::Usage(
            "--grid needs --bode or --out to place the CSV".into(),
        ));
    }
    let method = match a.method {
        MethodArg::Q => Method::QForm,
        MethodArg::P => Method::PForm,
    };
    let hash = hex::encode(Sha256::digest(&bytes));
    info!(
        "reducing {} (sha256 {hash}) to r={}",
        a.input.display(),
        a.order
    );
    let result =
        qls_reduce::reduce(&full, a.order, method, a.passive, &opts).map_err(map_reduce_error)?;
    let provenance = Provenance::new(hash, a.order, &opts);
    let json_text = result.to_json(Some(&provenance));
    if let Some(p) = &a.out {
        write_file(p, &json_text)?;
    }
    if let Some(grid) = &a.grid {
        let path = bode_path(a).expect("checked above");
        write_file(&path, &full_vs_reduced_csv(&full, &result, grid)?)?;
    }
    if let Some(p) = &a.trace {
        write_file(p, &qls_sdp::trace_to_csv(&result.trace.ap_trace))?;
    }
    if a.json {
        emit(out, &json_text)?;
    } else {
        emit(out, &reduction_report(&full, &result))?;
    }
    Ok(result.certified)
}

fn all_channels(sys: &System) -> Vec<Channel> {
    let (rows, cols) = (sys.c().nrows(), sys.b().ncols());
    (0..rows)
        .flat_map(|o| (0..cols).map(move |i| Channel::new(o, i)))
        .collect()
}

fn full_vs_reduced_csv(
    full: &System,
    result: &ReductionResult<f64>,
    grid: &FrequencyGrid,
) -> Result<String, CliError> {
    let table = freq_response_export(
        &[("full", full), ("reduced", &result.reduced)],
        grid,
        &all_channels(full),
    )
    .map_err(|e| CliError::Failed(e.to_string()))?;
    Ok(table.to_csv())
}

pub fn h2(a: &H2Args, out: &mut dyn Write) -> Result<bool, CliError> {
    let (full, _) = load_system(&a.full)?;
    let (red, _) = load_system(&a.reduced)?;
    let gram = h2_norm_gramian(&full, &red).map_err(|e| CliError::Failed(e.to_string()))?;
    let quad = h2_norm_quadrature(&full, &red, &QuadratureSpec::default());
    if a.json {
        let v = json!({
            "h2": gram.norm,
            "h2_squared": gram.squared,
            "trace_b": gram.via_b,
            "trace_c": gram.via_c,
            "quadrature": quad.as_ref().ok().map(|q| q.norm),
        });
        emit(out, &to_canonical_string(&v))?;
    } else {
        let mut s = format!("H2 error: {:.6} (squared {:.6})\n", gram.norm, gram.squared);
        s += &format!(
            "  tr(B^T Q B) = {:.10e}\n  tr(C P C^T) = {:.10e}\n",
            gram.via_b, gram.via_c
        );
        match &quad {
            Ok(q) => {
                s += &format!(
                    "  quadrature  = {:.6} ({} evaluations)\n",
                    q.norm, q.evaluations
                )
            }
            Err(e) => s += &format!("  quadrature unavailable: {e}\n"),
        }
        emit(out, &s)?;
    }
    Ok(true)
}

pub fn bode(a: &BodeArgs, out: &mut dyn Write) -> Result<bool, CliError> {
    let mut systems = Vec::new();
    for p in &a.inputs {
        let name = p
            .file_stem()
            .and_then(|s| s.to_str())
            .unwrap_or("sys")
            .to_string();
        systems.push((name, load_system(p)?.0));
    }
    let channels = match a.channel {
        Some((o, i)) => vec![Channel::new(o, i)],
        None => all_channels(&systems[0].1),
    };
    let refs: Vec<(&str, &System)> = systems.iter().map(|(n, s)| (n.as_str(), s)).collect();
    let csv = freq_response_export(&refs, &a.grid, &channels)
        .map_err(|e| CliError::Usage(e.to_string()))?
        .to_csv();
    match &a.out {
        Some(p) => write_file(p, &csv)?,
        None => emit(out, &csv)?,
    }
    Ok(true)
}

pub fn gen(a: &GenArgs, out: &mut dyn Write) -> Result<bool, CliError> {
    let sys = match (a.example, a.n) {
        (Some(ExampleArg::Optomech), _) => example_optomech_default::<f64>(),
        (Some(ExampleArg::Cascade), _) => example_cascade_default::<f64>(),
        (None, Some(n)) => {
            let l = a.l.unwrap_or(a.m);
            if n == 0 || a.m == 0 || l == 0 || l > a.m {
                return Err(CliError::Usage(format!(
                    "need n, m, l >= 1 and l <= m (got n={n}, m={}, l={l})",
                    a.m
                )));
            }
            random_realizable_with_outputs(n, a.m, l, a.seed, 1e-3)
                .map_err(|e| CliError::Failed(e.to_string()))?
        }
        (None, None) => {
            return Err(CliError::Usage(
                "either --n or --example is required".into(),
            ))
        }
    };
    let text = system_to_json(&sys);
    match &a.out {
        Some(p) => write_file(p, &text)?,
        None => emit(out, &text)?,
    }
    Ok(true)
}
