//! One function per subcommand. Each returns the process exit code.

use crate::args::*;
use crate::verify::{run_suite, SymbolSource};
use crate::CliError;
use nalgebra::Vector3;
use sbf::bvp::{assemble_dtn_system, decomposition_error, dtn_curved, ntd_curved, BvpConfig};
use sbf::evolution::{evolve, stable_dt, SchemeConfig, Trajectory, Variant};
use sbf::geometry::{compute_length, periodicized_frame, perturbed_circle, rescale_to_unit_length_with_modes, FourierCurve};
use sbf::io::{content_hash, curve_to_json, read_curve, read_field, CsvTable, VERSION};
use sbf::layers::{symbol_errors, Surface};
use sbf::multipliers::{build_table, Family};
use serde_json::{json, Value};
use std::f64::consts::PI;
use std::fs;
use std::path::Path;

type V3 = Vector3<f64>;

/// Metadata block carried by every output file.
fn meta(cmd: &Command, input_hash: &str) -> Value {
    json!({ "tool": "sbf", "version": VERSION, "config": cmd, "input_sha256": input_hash })
}

fn config_json(cmd: &Command) -> String {
    serde_json::to_string(cmd).expect("arguments serialize")
}

fn read_bytes(path: &Path) -> Result<Vec<u8>, CliError> {
    fs::read(path).map_err(|e| CliError::input(format!("{}: {e}", path.display())))
}

/// Write to `path`, or to stdout when absent.
fn emit(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| CliError::input(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON value serializes");
    s.push('\n');
    s
}

pub fn multipliers(cmd: &Command, a: &MultipliersArgs) -> Result<i32, CliError> {
    let tables = Family::ALL.map(|f| build_table(f, a.eps, a.kmax));
    let tables: Vec<_> = tables.into_iter().collect::<sbf::Result<_>>()?;
    let mut header = vec!["k", "z"];
    header.extend(tables.iter().map(|t| t.family.name()));
    let mut csv = CsvTable::new(&header);
    for (i, &(k, z, _)) in tables[0].entries.iter().enumerate() {
        let mut row = vec![k as f64, z];
        row.extend(tables.iter().map(|t| t.entries[i].2));
        csv.push(row);
    }
    let config = config_json(cmd);
    emit(a.out.as_deref(), &csv.render(&config, &content_hash(&[config.as_bytes()])))?;
    Ok(0)
}

pub fn verify(cmd: &Command, a: &VerifyArgs) -> Result<i32, CliError> {
    verify_with(cmd, a, &SymbolSource::default())
}

pub fn verify_with(cmd: &Command, a: &VerifyArgs, src: &SymbolSource) -> Result<i32, CliError> {
    let report = run_suite(a.suite, src);
    let config = config_json(cmd);
    let mut out = json!({ "meta": meta(cmd, &content_hash(&[config.as_bytes()])) });
    let body = serde_json::to_value(&report).expect("report serializes");
    out.as_object_mut().expect("object").extend(body.as_object().expect("object").clone());
    emit(a.out.as_deref(), &pretty(&out))?;
    Ok(if report.pass { 0 } else { 1 })
}

pub fn solve(cmd: &Command, a: &SolveArgs, inverse: bool) -> Result<i32, CliError> {
    let field_bytes = read_bytes(&a.field)?;
    let field = read_field(&a.field)?;
    let ns = field.n();
    let (surface, curve_bytes) = match (&a.curve, a.tube) {
        (Some(path), _) => {
            let bytes = read_bytes(path)?;
            let c = read_curve(path)?;
            let frame = periodicized_frame(&c, ns)?;
            (Surface::closed(&c, &frame, ns, a.nth, !a.unchecked)?, bytes)
        }
        (None, Some(eps)) => (Surface::straight_tube(eps, ns, a.nth, a.images)?, Vec::new()),
        (None, None) => return Err(CliError::input("either --curve or --tube is required".into())),
    };
    let eps = surface.grid.eps;
    let cfg = BvpConfig { eta_rel: a.eta_rel, ..BvpConfig::default() };
    let sys = assemble_dtn_system(surface, cfg)?;
    let (out, _) = if inverse { ntd_curved(&sys, &field)? } else { dtn_curved(&sys, &field)? };
    let cols: [&str; 4] = if inverse { ["s", "vx", "vy", "vz"] } else { ["s", "fx", "fy", "fz"] };
    let mut csv = CsvTable::new(&cols);
    for (i, v) in out.values.iter().enumerate() {
        csv.push(vec![i as f64 / ns as f64, v.x, v.y, v.z]);
    }
    let config = config_json(cmd);
    let hash = content_hash(&[config.as_bytes(), &curve_bytes, &field_bytes]);
    emit(a.out.as_deref(), &csv.render(&config, &hash))?;
    let report = json!({
        "meta": meta(cmd, &hash),
        "solve": sys.report,
        "grid": { "ns": ns, "nth": a.nth, "eps": eps, "tube": a.tube.is_some() },
        "output_max_norm": out.max_norm(),
    });
    match &a.report {
        Some(p) => emit(Some(p), &pretty(&report))?,
        None => eprint!("{}", pretty(&report)),
    }
    Ok(0)
}

/// Curve JSON with the metadata block and time added; still readable as a curve.
fn snapshot(c: &FourierCurve, t: f64, m: &Value) -> Result<String, CliError> {
    let mut v: Value = serde_json::from_str(&curve_to_json(c)?).map_err(sbf::Error::from)?;
    let obj = v.as_object_mut().expect("object");
    obj.insert("meta".into(), m.clone());
    obj.insert("t".into(), json!(t));
    Ok(pretty(&v))
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|e| CliError::input(format!("{}: {e}", path.display())))
}

pub fn evolve_cmd(cmd: &Command, a: &EvolveArgs) -> Result<i32, CliError> {
    let bytes = read_bytes(&a.curve)?;
    let mut curve = read_curve(&a.curve)?;
    let modes = a.modes.unwrap_or(curve.modes);
    if a.reparameterize {
        curve = rescale_to_unit_length_with_modes(&curve, modes)?;
    }
    let dt = match a.dt {
        Some(dt) => dt,
        None => stable_dt(curve.eps, modes, 1.0, a.cfl)?,
    };
    let base = SchemeConfig::new(dt, a.steps, modes);
    let cfg = SchemeConfig {
        variant: match a.variant {
            VariantArg::FrameSpectral => Variant::FrameSpectral,
            VariantArg::Cartesian => Variant::Cartesian,
        },
        correction_every: a.correction_every,
        ns: a.ns.unwrap_or(base.ns),
        nth: a.nth,
        min_star: a.min_star,
        ..base
    };
    let traj = evolve(&curve, &cfg)?;

    let config = config_json(cmd);
    let hash = content_hash(&[config.as_bytes(), &bytes]);
    let m = meta(cmd, &hash);
    fs::create_dir_all(&a.out_dir).map_err(|e| CliError::input(format!("{}: {e}", a.out_dir.display())))?;
    write_diagnostics(&traj, &a.out_dir.join("diagnostics.csv"), &config, &hash)?;
    if a.snapshot_every > 0 {
        let dir = a.out_dir.join("snapshots");
        fs::create_dir_all(&dir).map_err(|e| CliError::input(format!("{}: {e}", dir.display())))?;
        for (step, s) in traj.states.iter().enumerate().step_by(a.snapshot_every) {
            write_file(&dir.join(format!("step_{step:06}.json")), &snapshot(&s.curve, s.t, &m)?)?;
        }
    }
    let last = traj.states.last().expect("initial state");
    write_file(&a.out_dir.join("final.json"), &snapshot(&last.curve, last.t, &m)?)?;
    let report = json!({
        "meta": m,
        "dt": dt,
        "steps_requested": a.steps,
        "steps_taken": traj.states.len() - 1,
        "final_t": last.t,
        "final_lambda": last.lambda,
        "abort": traj.abort,
        "under_resolved": traj.under_resolved,
    });
    write_file(&a.out_dir.join("report.json"), &pretty(&report))?;
    match &traj.abort {
        Some(reason) => {
            eprintln!("sbf: evolution aborted after {} steps: {reason}", traj.states.len() - 1);
            Ok(3)
        }
        None => Ok(0),
    }
}

fn write_diagnostics(traj: &Trajectory, path: &Path, config: &str, hash: &str) -> Result<(), CliError> {
    let mut csv = CsvTable::new(&["t", "lambda", "kappa_max", "star", "energy", "r_eff", "truncated"]);
    for s in &traj.states {
        let d = &s.diagnostics;
        csv.push(vec![s.t, d.lambda, d.kappa_max, d.star, d.bending_energy, d.r_eff, d.truncated]);
    }
    write_file(path, &csv.render(config, hash))
}

/// Previous error over this one; NaN on the first row.
fn ratios(errors: &[f64]) -> Vec<f64> {
    (0..errors.len()).map(|i| if i == 0 { f64::NAN } else { errors[i - 1] / errors[i] }).collect()
}

pub fn converge(cmd: &Command, a: &ConvergeArgs) -> Result<i32, CliError> {
    if a.levels < 2 {
        return Err(CliError::input("--levels must be at least 2".into()));
    }
    let csv = match a.study {
        Study::Quadrature => converge_quadrature(a)?,
        Study::Decomposition => converge_decomposition(a)?,
        Study::Dt => converge_dt(a)?,
    };
    let config = config_json(cmd);
    emit(a.out.as_deref(), &csv.render(&config, &content_hash(&[config.as_bytes()])))?;
    Ok(0)
}

/// Layer quadrature on the straight tube against the cylinder symbols,
/// `ε = 0.05`, `|k| ≤ 4`, doubling both grid sizes per level.
fn converge_quadrature(a: &ConvergeArgs) -> Result<CsvTable, CliError> {
    let (ns, nth) = (a.ns.unwrap_or(64), a.nth.unwrap_or(8));
    let mut rows = Vec::new();
    for l in 0..a.levels {
        let (n, m) = (ns << l, nth << l);
        let e = symbol_errors(0.05, 4, n, m, 32)?;
        rows.push((n, m, e));
    }
    let errors: Vec<f64> = rows.iter().map(|r| r.2.max()).collect();
    let mut csv = CsvTable::new(&["ns", "nth", "single_t", "double_t", "single_n", "double_n", "error", "ratio"]);
    for ((n, m, e), r) in rows.iter().zip(ratios(&errors)) {
        csv.push(vec![*n as f64, *m as f64, e.single_t, e.double_t, e.single_n, e.double_n, e.max(), r]);
    }
    Ok(csv)
}

/// Remainder of the curved DtN after the frame-mapped straight DtN on a
/// 5% perturbed circle, one row per `ε`.
fn converge_decomposition(a: &ConvergeArgs) -> Result<CsvTable, CliError> {
    let eps_list = a.eps_list.clone().unwrap_or_else(|| vec![0.08, 0.04, 0.02, 0.01]);
    let first = *eps_list.first().ok_or_else(|| CliError::input("--eps-list is empty".into()))?;
    let (ns, nth) = (a.ns.unwrap_or(128), a.nth.unwrap_or(16));
    let c = perturbed_circle(first, 0.05, 3, 0.0, 0, 8)?;
    let g = |s: f64| V3::new((2.0 * PI * s).sin(), (4.0 * PI * s).cos(), 0.5 * (2.0 * PI * s).cos());
    let rows = decomposition_error(&c, &eps_list, g, |_| (ns, nth), BvpConfig::default())?;
    let mut csv = CsvTable::new(&["eps", "ns", "nth", "error", "reference", "ratio"]);
    for r in rows {
        csv.push(vec![r.eps, r.ns as f64, r.nth as f64, r.error, r.reference, r.ratio.unwrap_or(f64::NAN)]);
    }
    Ok(csv)
}

/// Final-state difference against a run with two more halvings of `dt`,
/// at a fixed end time on a perturbed circle.
fn converge_dt(a: &ConvergeArgs) -> Result<CsvTable, CliError> {
    let (eps, modes) = (0.05, 32);
    let c = perturbed_circle(eps, 0.05, 3, 0.02, 2, modes)?;
    let dt0 = stable_dt(eps, modes, 1.0, 0.5)?;
    let run = |level: usize| -> Result<(f64, usize, FourierCurve), CliError> {
        let steps = 4 << level;
        let dt = dt0 / (1u64 << level) as f64;
        let traj = evolve(&c, &SchemeConfig::new(dt, steps, modes))?;
        if let Some(reason) = traj.abort {
            return Err(CliError { code: 3, msg: format!("dt study run aborted: {reason}") });
        }
        Ok((dt, steps, traj.states.last().expect("initial state").curve.clone()))
    };
    let (_, _, reference) = run(a.levels + 1)?;
    let dist = |x: &FourierCurve| {
        (0..256).map(|i| (x.point(i as f64 / 256.0) - reference.point(i as f64 / 256.0)).norm()).fold(0.0, f64::max)
    };
    let mut rows = Vec::new();
    for l in 0..a.levels {
        let (dt, steps, x) = run(l)?;
        rows.push((dt, steps, dist(&x), compute_length(&x)));
    }
    let errors: Vec<f64> = rows.iter().map(|r| r.2).collect();
    let mut csv = CsvTable::new(&["dt", "steps", "error", "lambda", "ratio"]);
    for ((dt, steps, e, lam), r) in rows.into_iter().zip(ratios(&errors)) {
        csv.push(vec![dt, steps as f64, e, lam, r]);
    }
    Ok(csv)
}
