use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};

use weblab::datum::{load_datum_with, parse_test_functions, Datum, LinearDatum, ScanOptions, TripleDatum};
use weblab::flows::{sample_script_f, write_chain_csv, write_script_f_csv, ChainBuilder, CloudSpec, FlowConfig};
use weblab::hypotheses::{
    aux_tau_family_check, aux_weak_check, check_nondegeneracy, curvature_identically_zero, det_b_max,
    elimination_second_order, main_hypothesis_scan, write_kernel_csv, KernelMode, Verdict,
};
use weblab::lineardata::enumerate_associated;
use weblab::sublevel::{run_sweep, write_sweep_csv, EpsRange, MeasureConfig};

use crate::manifest::RunManifest;
use crate::{ChainArgs, CheckArgs, Command, DeriveArgs, FlowsCommand, JetsArgs, MeasureArgs, ScriptFArgs};

#[derive(Debug)]
pub enum CliError {
    Validation(String),
    Runtime(String),
}

impl CliError {
    pub fn is_validation(&self) -> bool {
        matches!(self, CliError::Validation(_))
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Validation(m) => write!(f, "invalid input: {m}"),
            CliError::Runtime(m) => write!(f, "{m}"),
        }
    }
}

impl From<weblab::Error> for CliError {
    fn from(e: weblab::Error) -> Self {
        if e.is_validation() {
            CliError::Validation(e.to_string())
        } else {
            CliError::Runtime(e.to_string())
        }
    }
}

type Result<T> = std::result::Result<T, CliError>;

pub fn run(cmd: Command) -> Result<Vec<String>> {
    match cmd {
        Command::Check(a) => check(a),
        Command::Measure(a) => measure(a),
        Command::Flows(f) => match f.command {
            FlowsCommand::Chain(a) => chain(a),
            FlowsCommand::ScriptF(a) => script_f(a),
        },
        Command::Derive(a) => derive(a),
        Command::Jets(a) => jets(a),
    }
}

fn read_input(path: &Path, manifest: &mut RunManifest) -> Result<String> {
    let bytes = fs::read(path).map_err(|e| CliError::Validation(format!("cannot read {}: {e}", path.display())))?;
    manifest.add_input(path, &bytes);
    String::from_utf8(bytes).map_err(|_| CliError::Validation(format!("{} is not UTF-8", path.display())))
}

fn write_output(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", path.display())))
}

fn write_json(path: &Path, v: &Value) -> Result<()> {
    let mut s = serde_json::to_string_pretty(v).expect("json serializes");
    s.push('\n');
    write_output(path, s.as_bytes())
}

fn write_csv(path: &Path, manifest: &RunManifest, body: impl FnOnce(&mut Vec<u8>) -> weblab::Result<()>) -> Result<()> {
    let mut buf = manifest.csv_header().into_bytes();
    body(&mut buf)?;
    write_output(path, &buf)
}

fn load(path: &Path, manifest: &mut RunManifest, opts: ScanOptions) -> Result<(Datum, Value)> {
    let text = read_input(path, manifest)?;
    let loaded = load_datum_with(&text, opts)?;
    let scan = serde_json::to_value(&loaded.scan).expect("scan serializes");
    Ok((loaded.datum, scan))
}

fn triple(d: Datum) -> Result<TripleDatum> {
    match d {
        Datum::Triple(t) => Ok(t),
        Datum::Linear(_) => Err(CliError::Validation("this subcommand needs a triple datum".into())),
    }
}

fn linear(d: Datum) -> Result<LinearDatum> {
    match d {
        Datum::Linear(l) => Ok(l),
        Datum::Triple(_) => Err(CliError::Validation("this subcommand needs a linear datum".into())),
    }
}

/// Result of one check, or the error that stopped it.
fn capture<T: Serialize>(r: weblab::Result<T>) -> Value {
    match r {
        Ok(v) => serde_json::to_value(v).expect("report serializes"),
        Err(e) => json!({"error": e.to_string()}),
    }
}

fn verdict_of(v: &Value) -> String {
    if let Some(e) = v.get("error") {
        return format!("error ({})", e.as_str().unwrap_or_default());
    }
    v.get("verdict")
        .and_then(Value::as_str)
        .map(str::to_string)
        .unwrap_or_else(|| "n/a".into())
}

fn check(a: CheckArgs) -> Result<Vec<String>> {
    let mode: KernelMode = a.mode.into();
    let mut m = RunManifest::new(
        "check",
        json!({
            "grid": a.grid, "nmax": a.nmax, "jet_points": a.jet_points, "mode": mode,
            "tol": a.tol, "samples": a.samples, "seed": a.seed,
            "elimination_tol": 1e-10,
        }),
    );
    let (datum, scan) = load(&a.datum, &mut m, ScanOptions { grid: a.grid, tol: a.tol })?;
    let d = triple(datum)?;
    let nondeg = capture(check_nondegeneracy(&d, a.grid, a.tol));
    let curvature = if d.is_adapted() {
        capture(curvature_identically_zero(&d, a.grid, a.tol))
    } else {
        json!({"skipped": "datum is not in adapted coordinates"})
    };
    let pts = d.domain.grid(a.jet_points);
    let main = capture(main_hypothesis_scan(&d, &pts, a.nmax, mode));
    let elimination = capture(elimination_second_order(&d, a.grid, 1e-10));
    let weak: Vec<Value> = [(1, 2, 3), (1, 3, 2), (2, 3, 1)]
        .into_iter()
        .map(|p| capture(aux_weak_check(&d, p, a.grid, a.tol)))
        .collect();
    let tau: Vec<Value> = (1..=3).map(|k| capture(aux_tau_family_check(&d, k, a.grid, a.tol))).collect();
    let detb = capture(det_b_max(&d, a.samples, a.seed).map(|r| {
        json!({"samples": r.samples, "seed": r.seed, "max_abs": r.max_abs, "argmax": r.argmax})
    }));
    let mut lines = vec![
        format!("nondegeneracy: {}", verdict_of(&nondeg)),
        format!(
            "web curvature identically zero: {}",
            curvature
                .get("zero")
                .map(|z| z.to_string())
                .unwrap_or_else(|| verdict_of(&curvature))
        ),
        format!("main hypothesis: {}", verdict_of(&main)),
    ];
    for (w, pair) in weak.iter().zip(["(1,2)", "(1,3)", "(2,3)"]) {
        lines.push(format!("weak auxiliary {pair}: {}", verdict_of(w)));
    }
    for (k, t) in tau.iter().enumerate() {
        lines.push(format!("auxiliary tau family k={}: {}", k + 1, verdict_of(t)));
    }
    lines.push(format!(
        "max |det B|: {}",
        detb.get("max_abs").map(|v| v.to_string()).unwrap_or_else(|| verdict_of(&detb))
    ));
    let report = json!({
        "manifest": m.to_value(),
        "datum_scan": scan,
        "nondegeneracy": nondeg,
        "web_curvature": curvature,
        "main_hypothesis": main,
        "elimination": elimination,
        "aux_weak": weak,
        "aux_tau_family": tau,
        "det_b": detb,
    });
    write_json(&a.out, &report)?;
    lines.push(format!("report written to {}", a.out.display()));
    Ok(lines)
}

fn default_fit_path(out: &Path) -> PathBuf {
    out.with_extension("fit.json")
}

fn measure(a: MeasureArgs) -> Result<Vec<String>> {
    let range = EpsRange::new(a.eps_min, a.eps_max)?;
    let cfg = MeasureConfig {
        method: a.method.into(),
        resolution: a.res,
        seed: a.seed,
        cell_sample: a.cell_sample.into(),
    };
    let mut m = RunManifest::new("measure", json!({"eps_range": range, "measure": cfg, "norm": "euclidean"}));
    let (datum, _) = load(&a.datum, &mut m, ScanOptions::default())?;
    let d = triple(datum)?;
    let ftext = read_input(&a.f, &mut m)?;
    let f = parse_test_functions(&ftext)?;
    if f.len() != 3 {
        return Err(CliError::Validation(format!("need 3 test functions, got {}", f.len())));
    }
    let sweep = run_sweep(&d, &f, &range, &cfg)?;
    write_csv(&a.out, &m, |buf| write_sweep_csv(&sweep.estimates, buf))?;
    let fit_path = a.fit.unwrap_or_else(|| default_fit_path(&a.out));
    let fit = match &sweep.fit {
        Some(fit) => json!({
            "manifest": m.to_value(), "label": "instance exponent",
            "tau_hat": fit.tau_hat, "logC_hat": fit.log_c_hat, "r2": fit.r2, "eps": fit.eps,
        }),
        None => json!({
            "manifest": m.to_value(), "label": "instance exponent",
            "tau_hat": null, "logC_hat": null, "r2": null, "eps": [],
            "reason": "fewer than three nonzero measures",
        }),
    };
    write_json(&fit_path, &fit)?;
    let mut lines: Vec<String> = sweep
        .estimates
        .iter()
        .map(|e| format!("eps = {:.3e}: measure {:.6e}", e.eps, e.value))
        .collect();
    match &sweep.fit {
        Some(f) => lines.push(format!("instance exponent {:.4} (R^2 = {:.4})", f.tau_hat, f.r2)),
        None => lines.push("no fit: fewer than three nonzero measures".into()),
    }
    lines.push(format!("sweep written to {}, fit to {}", a.out.display(), fit_path.display()));
    Ok(lines)
}

fn chain(a: ChainArgs) -> Result<Vec<String>> {
    let cfg = FlowConfig { steps_per_unit: a.steps_per_unit, fixed_steps: None };
    let mut m = RunManifest::new("flows chain", json!({"z": a.z, "tvec": a.tvec, "eps": a.eps, "flow": cfg}));
    let (datum, _) = load(&a.datum, &mut m, ScanOptions::default())?;
    let d = triple(datum)?;
    let z: [f64; 3] = a.z.as_slice().try_into().map_err(|_| CliError::Validation("--z needs x1,x2,t".into()))?;
    let builder = ChainBuilder::new(&d, cfg)?;
    let c = builder.chain(z, a.eps, &a.tvec)?;
    write_csv(&a.out, &m, |buf| write_chain_csv(&c, buf))?;
    let mut lines = Vec::new();
    for n in 1..=c.len() {
        lines.push(format!("b_{n} = {}", builder.b_n(&c, n)?));
    }
    let end = c.end();
    lines.push(format!("end point ({}, {}, {})", end[0], end[1], end[2]));
    lines.push(format!("chain written to {}", a.out.display()));
    Ok(lines)
}

fn script_f(a: ScriptFArgs) -> Result<Vec<String>> {
    let spec = CloudSpec { samples: a.samples, seed: a.seed, t_max: a.t_max, s_max: a.s_max };
    let mut m = RunManifest::new("flows script-f", json!({"zbar": a.zbar, "cloud": spec}));
    let (datum, _) = load(&a.datum, &mut m, ScanOptions::default())?;
    let d = triple(datum)?;
    let zbar: [f64; 3] = a.zbar.as_slice().try_into().map_err(|_| CliError::Validation("--zbar needs x1,x2,t".into()))?;
    let samples = sample_script_f(&d, zbar, &spec)?;
    write_csv(&a.out, &m, |buf| write_script_f_csv(&samples, buf))?;
    let min = samples.iter().map(|s| s.value).fold(f64::INFINITY, f64::min);
    let max = samples.iter().map(|s| s.value).fold(0.0, f64::max);
    Ok(vec![
        format!("{} samples: min {min:.6e}, max {max:.6e}", samples.len()),
        format!("samples written to {}", a.out.display()),
    ])
}

fn derive(a: DeriveArgs) -> Result<Vec<String>> {
    let mut m = RunManifest::new("derive", json!({"depth": a.depth, "dedup": !a.no_dedup}));
    let (datum, _) = load(&a.datum, &mut m, ScanOptions::default())?;
    let d = linear(datum)?;
    let tree = enumerate_associated(&d, a.depth, !a.no_dedup)?;
    write_json(&a.out, &json!({"manifest": m.to_value(), "tree": tree}))?;
    if let Some(dot) = &a.dot {
        write_output(dot, tree.to_dot().as_bytes())?;
    }
    let flagged = tree.nodes.iter().filter(|n| !n.zero_coefficients.is_empty()).count();
    let mut lines = vec![
        format!("nodes per depth: {:?} ({} total, {} merged)", tree.per_level, tree.len(), tree.merged),
        format!("{flagged} node(s) with identically vanishing coefficients"),
    ];
    if tree.depth_exceeded {
        lines.push(format!("depth limit {} reached with derivable nodes left", a.depth));
    }
    lines.push(format!("tree written to {}", a.out.display()));
    Ok(lines)
}

fn jets(a: JetsArgs) -> Result<Vec<String>> {
    let mode: KernelMode = a.mode.into();
    let mut m = RunManifest::new(
        "jets",
        json!({"nmax": a.nmax, "mode": mode, "grid": a.grid, "points": a.point}),
    );
    let (datum, _) = load(&a.datum, &mut m, ScanOptions::default())?;
    let d = triple(datum)?;
    let pts = if a.point.is_empty() { d.domain.grid(a.grid) } else { a.point.clone() };
    let scan = main_hypothesis_scan(&d, &pts, a.nmax, mode)?;
    write_csv(&a.out, &m, |buf| write_kernel_csv(&scan, buf))?;
    if let Some(path) = &a.json {
        write_json(path, &json!({"manifest": m.to_value(), "scan": scan}))?;
    }
    let mut lines: Vec<String> = scan
        .points
        .iter()
        .map(|p| {
            let dims: Vec<String> = p
                .dims
                .iter()
                .map(|d| d.map(|v| v.to_string()).unwrap_or_else(|| "?".into()))
                .collect();
            format!("({}, {}): dims [{}] {}", p.x[0], p.x[1], dims.join(" "), p.status)
        })
        .collect();
    let v = match scan.verdict {
        Verdict::Holds => "holds",
        Verdict::Fails => "fails",
        Verdict::Inconclusive => "inconclusive",
    };
    lines.push(format!("main hypothesis: {v} ({})", scan.summary));
    Ok(lines)
}
