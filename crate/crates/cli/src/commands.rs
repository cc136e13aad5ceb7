use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::Path;

use linag_core::casestudy::{
    build_contract_c, build_contract_c1, build_contract_c2, build_follower_system, build_triple,
    check_trace, load_scenario, simulate, summarize, write_headway_csv, write_trace_csv, Scenario,
};
use linag_core::contracts::{load_contract, save_contract, CascadeTriple};
use linag_core::refinement::{
    check_extendability_with, check_refinement_with, stacked_triples, ExtendabilityVerdict,
    HorizonConfig, RefinementVerdict,
};
use linag_core::satisfaction::{
    check_satisfaction_with, load_init, load_system, save_init, save_system, SatisfactionVerdict,
};
use linag_core::verdict::{RowResult, RowStatus};
use linag_core::{Execution, Simplex};
use nalgebra::DVector;
use serde::Serialize;
use serde_json::{json, Value};

use crate::args::{
    CasestudyArgs, ExportArgs, ExtendArgs, ExtendPolicy, RefineArgs, ReportArgs, SatisfyArgs,
};
use crate::error::{CliError, Exit};
use crate::files::{load_extend, ExtendFile, Triple};
use crate::manifest::RunManifest;

/// Horizons used by `casestudy`: both implications need two steps.
pub const CASESTUDY_HORIZON: (usize, usize) = (2, 2);

/// Fixed-point text for extended reals; `-0` prints as `0`.
pub fn num(v: f64) -> String {
    if v == f64::INFINITY {
        return "+inf".into();
    }
    if v == f64::NEG_INFINITY {
        return "-inf".into();
    }
    fixed(v, 9)
}

/// `{v:.prec}`, printing values that round to zero without a sign.
fn fixed(v: f64, prec: usize) -> String {
    let s = format!("{v:.prec$}");
    match s.strip_prefix('-') {
        Some(rest) if rest.chars().all(|c| c == '0' || c == '.') => rest.to_string(),
        _ => s,
    }
}

fn vec_text(v: &DVector<f64>) -> String {
    let parts: Vec<String> = v.iter().map(|&x| fixed(x, 6)).collect();
    format!("[{}]", parts.join(", "))
}

fn check_tol(tol: f64) -> Result<f64, CliError> {
    if tol.is_finite() && tol >= 0.0 {
        Ok(tol)
    } else {
        Err(CliError::Invalid(format!("tolerance must be finite and non-negative, got {tol}")))
    }
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value).expect("report serialises") + "\n";
    fs::write(path, text).map_err(CliError::output(path))
}

/// Writes the report file if asked, then either the JSON or the text summary.
fn emit(args: &ReportArgs, report: &Value, text: &str, out: &mut dyn Write) -> Result<(), CliError> {
    if let Some(path) = &args.report {
        write_json(path, report)?;
    }
    let body = if args.json {
        serde_json::to_string_pretty(report).expect("report serialises") + "\n"
    } else {
        text.to_string()
    };
    out.write_all(body.as_bytes()).map_err(CliError::output("<stdout>"))
}

fn row_lines<F: std::fmt::Display>(rows: &[RowResult<F>], tol: f64, s: &mut String) {
    for r in rows.iter().filter(|r| !r.passes(tol)) {
        match (&r.witness, &r.ray) {
            (_, Some(ray)) if r.status == RowStatus::Unbounded => {
                let _ = writeln!(s, "  {} row {}: unbounded along {}", r.family, r.row, vec_text(ray));
            }
            (Some(w), _) => {
                let _ = writeln!(s, "  {} row {}: theta {} at {}", r.family, r.row, num(r.theta), vec_text(w));
            }
            _ => {
                let _ = writeln!(s, "  {} row {}: theta {}", r.family, r.row, num(r.theta));
            }
        }
    }
}

// --- refine ------------------------------------------------------------------

#[derive(Debug, Serialize)]
pub struct NamedExtendability {
    pub name: String,
    #[serde(flatten)]
    pub verdict: ExtendabilityVerdict,
}

fn resolve_horizon(a: &RefineArgs, t: &CascadeTriple) -> Result<HorizonConfig, CliError> {
    let auto = if a.auto_horizon { HorizonConfig::suggest(t) } else { HorizonConfig::default() };
    Ok(HorizonConfig::new(
        a.horizon_ii.unwrap_or(auto.horizon_ii),
        a.horizon_iii.unwrap_or(auto.horizon_iii),
    )?)
}

fn stacked_extendability(
    t: &CascadeTriple,
) -> Result<Vec<NamedExtendability>, CliError> {
    let solver = Simplex::default();
    stacked_triples(t)
        .into_iter()
        .map(|x| {
            let verdict = check_extendability_with(&solver, &x.v1, &x.v0, &x.rhs)?;
            Ok(NamedExtendability { name: x.name.to_string(), verdict })
        })
        .collect()
}

fn extend_line(e: &NamedExtendability) -> String {
    let v = &e.verdict;
    if !v.is_supported() {
        return format!(
            "{}: unsupported, pair dimension {} with {} rows exceeds the enumeration limits",
            e.name, v.dimension, v.rows
        );
    }
    let mut s = format!(
        "{}: {} (pair dimension {}, {} rows, {} vertices, {} rays)",
        e.name,
        if v.extendable { "extendable" } else { "not extendable" },
        v.dimension,
        v.rows,
        v.vertices_checked,
        v.rays_checked
    );
    if let Some(c) = &v.counterexample {
        let _ = write!(s, "; stuck pair u0 = {}, u1 = {}", vec_text(&c.u0), vec_text(&c.u1));
    }
    s
}

/// Exit code for a set of extendability verdicts: any refutation wins over
/// an unsupported size.
fn extend_exit(list: &[NamedExtendability]) -> Exit {
    if list.iter().any(|e| e.verdict.is_supported() && !e.verdict.extendable) {
        Exit::Failed
    } else if list.iter().any(|e| !e.verdict.is_supported()) {
        Exit::Unsupported
    } else {
        Exit::Ok
    }
}

pub fn refine(a: &RefineArgs, exec: Execution, out: &mut dyn Write) -> Result<Exit, CliError> {
    let mut m = RunManifest::start("refine");
    for p in [&a.upstream, &a.downstream, &a.composite] {
        m.input(p);
    }
    let t = CascadeTriple::new(
        load_contract(&a.upstream)?,
        load_contract(&a.downstream)?,
        load_contract(&a.composite)?,
    )?;
    let tol = check_tol(a.tol.tol)?;
    let h = resolve_horizon(a, &t)?;
    m.option("tolerance", tol);
    m.option("horizon", h);
    m.option("check_extendability", a.check_extendability);

    let verdict = check_refinement_with(&Simplex::default(), exec, &t, h, tol)?;
    let ext = if a.check_extendability { Some(stacked_extendability(&t)?) } else { None };

    let mut exit = if verdict.holds { Exit::Ok } else { Exit::Failed };
    if let Some(list) = &ext {
        for e in list.iter().filter(|e| !e.verdict.is_supported() || !e.verdict.extendable) {
            log::warn!("{}", extend_line(e));
        }
        if a.extendability_policy == ExtendPolicy::Fail && exit == Exit::Ok {
            exit = extend_exit(list);
        }
    }
    m.finish(if verdict.holds { "holds" } else { "fails" });

    let mut text = refine_text(&verdict);
    if let Some(list) = &ext {
        for e in list {
            let _ = writeln!(text, "  extendability {}", extend_line(e));
        }
    }
    let report = json!({ "manifest": m, "verdict": verdict, "extendability": ext });
    emit(&a.out, &report, &text, out)?;
    Ok(exit)
}

pub fn refine_text(v: &RefinementVerdict) -> String {
    let mut s = format!(
        "refinement {}\n  tolerance {:e}, horizons ii={} iii={}, {} LPs\n",
        if v.holds { "holds" } else { "FAILS" },
        v.tolerance,
        v.horizon.horizon_ii,
        v.horizon.horizon_iii,
        v.lp_count
    );
    for (name, rho) in [("rho_D", v.rho_d), ("rho_otimes", v.rho_otimes), ("rho_Omega", v.rho_omega)] {
        let _ = writeln!(s, "  {name:<10} {}", num(rho));
    }
    row_lines(&v.rows, v.tolerance, &mut s);
    s
}

// --- satisfy -----------------------------------------------------------------

pub fn satisfy(a: &SatisfyArgs, exec: Execution, out: &mut dyn Write) -> Result<Exit, CliError> {
    let mut m = RunManifest::start("satisfy");
    for p in [&a.system, &a.contract, &a.init] {
        m.input(p);
    }
    let sys = load_system(&a.system)?;
    let c = load_contract(&a.contract)?;
    let init = load_init(&a.init)?;
    let tol = check_tol(a.tol.tol)?;
    m.option("tolerance", tol);
    let verdict = check_satisfaction_with(&Simplex::default(), exec, &sys, &c, &init, tol)?;
    m.finish(if verdict.holds { "holds" } else { "fails" });
    let text = satisfy_text(&verdict);
    emit(&a.out, &json!({ "manifest": m, "verdict": verdict }), &text, out)?;
    Ok(if verdict.holds { Exit::Ok } else { Exit::Failed })
}

pub fn satisfy_text(v: &SatisfactionVerdict) -> String {
    let mut s = format!(
        "satisfaction {}\n  tolerance {:e}, {} LPs\n",
        if v.holds { "holds" } else { "FAILS" },
        v.tolerance,
        v.lp_count
    );
    let list = |xs: &[f64]| xs.iter().map(|x| num(*x)).collect::<Vec<_>>().join(", ");
    let _ = writeln!(s, "  theta_base [{}]", list(&v.theta_base));
    let _ = writeln!(s, "  theta_step [{}]", list(&v.theta_step));
    row_lines(&v.rows, v.tolerance, &mut s);
    s
}

// --- extend ------------------------------------------------------------------

pub fn extend(a: &ExtendArgs, out: &mut dyn Write) -> Result<Exit, CliError> {
    let mut m = RunManifest::start("extend");
    let list = if let Some(paths) = &a.cascade {
        for p in paths {
            m.input(p);
        }
        let t = CascadeTriple::new(load_contract(&paths[0])?, load_contract(&paths[1])?, load_contract(&paths[2])?)?;
        stacked_extendability(&t)?
    } else {
        let solver = Simplex::default();
        let mut list = Vec::new();
        for p in &a.files {
            m.input(p);
            let (label, v1, v0, rhs): Triple = load_extend(p)?;
            let verdict = check_extendability_with(&solver, &v1, &v0, &rhs)?;
            let name = if label.is_empty() { p.display().to_string() } else { label };
            list.push(NamedExtendability { name, verdict });
        }
        list
    };
    let exit = extend_exit(&list);
    m.finish(match exit {
        Exit::Ok => "extendable",
        Exit::Unsupported => "unsupported",
        _ => "not extendable",
    });
    let text: String = list.iter().map(|e| extend_line(e) + "\n").collect();
    emit(&a.out, &json!({ "manifest": m, "triples": list }), &text, out)?;
    Ok(exit)
}

// --- casestudy ---------------------------------------------------------------

#[derive(Debug, Serialize)]
struct CasestudySummary<'a> {
    manifest: &'a RunManifest,
    status: &'a str,
    scenario: &'a Scenario,
    refinement: Option<&'a RefinementVerdict>,
    satisfaction: Option<&'a SatisfactionVerdict>,
    simulation: Option<Value>,
}

pub fn casestudy(a: &CasestudyArgs, exec: Execution, out: &mut dyn Write) -> Result<Exit, CliError> {
    let mut m = RunManifest::start("casestudy");
    let mut scenario = match &a.scenario {
        Some(p) => {
            m.input(p);
            load_scenario(p)?
        }
        None => Scenario::default(),
    };
    if let Some(r) = a.runs {
        scenario.runs = r;
    }
    if let Some(s) = a.seed {
        scenario.seed = s;
    }
    scenario.params.apply_overrides(&a.overrides)?;
    for w in scenario.params.validate()? {
        log::warn!("{w}");
    }
    scenario.leader.validate().map_err(|e| CliError::Invalid(e.to_string()))?;
    let tol = check_tol(a.tol.tol)?;
    let h = HorizonConfig::new(CASESTUDY_HORIZON.0, CASESTUDY_HORIZON.1)?;
    m.overrides = a.overrides.clone();
    m.seed = Some(scenario.seed);
    m.option("runs", scenario.runs);
    m.option("duration_s", scenario.duration_s);
    m.option("tolerance", tol);
    m.option("horizon", h);

    let traces_dir = a.out.join("traces");
    fs::create_dir_all(&traces_dir).map_err(CliError::output(&traces_dir))?;
    let solver = Simplex::default();
    let p = &scenario.params;

    let refinement = check_refinement_with(&solver, exec, &build_triple(p), h, tol)?;
    let mut text = refine_text(&refinement);
    let finish = |m: &mut RunManifest,
                      status: &str,
                      sat: Option<&SatisfactionVerdict>,
                      sim: Option<Value>,
                      text: &str,
                      out: &mut dyn Write|
     -> Result<(), CliError> {
        m.finish(status);
        let summary = CasestudySummary {
            manifest: m,
            status,
            scenario: &scenario,
            refinement: Some(&refinement),
            satisfaction: sat,
            simulation: sim,
        };
        write_json(&a.out.join("summary.json"), &summary)?;
        let line = format!("{text}status {status}\n");
        out.write_all(line.as_bytes()).map_err(CliError::output("<stdout>"))
    };
    if !refinement.holds {
        finish(&mut m, "refinement-failed", None, None, &text, out)?;
        return Ok(Exit::RefinementFailed);
    }

    let (sys, init) = build_follower_system(p)?;
    let satisfaction = check_satisfaction_with(&solver, exec, &sys, &build_contract_c2(p), &init, tol)?;
    text.push_str(&satisfy_text(&satisfaction));
    if !satisfaction.holds {
        finish(&mut m, "satisfaction-failed", Some(&satisfaction), None, &text, out)?;
        return Ok(Exit::SatisfactionFailed);
    }

    let traces = simulate(
        p,
        &scenario.leader,
        &scenario.follower,
        scenario.seed,
        scenario.runs,
        scenario.duration_s,
        exec,
    )?;
    let width = traces.len().saturating_sub(1).to_string().len().max(3);
    for t in &traces {
        let path = traces_dir.join(format!("run-{:0width$}.csv", t.run));
        let file = fs::File::create(&path).map_err(CliError::output(&path))?;
        write_trace_csv(t, std::io::BufWriter::new(file))
            .map_err(|e| CliError::Output { path: path.clone(), source: e.into() })?;
    }
    let path = a.out.join("headway.csv");
    let file = fs::File::create(&path).map_err(CliError::output(&path))?;
    write_headway_csv(&traces, std::io::BufWriter::new(file))
        .map_err(|e| CliError::Output { path: path.clone(), source: e.into() })?;

    let sim = summarize(&traces, scenario.seed);
    let trace_errors: Vec<String> =
        traces.iter().filter_map(|t| check_trace(t).err()).map(|e| e.to_string()).collect();
    for e in &trace_errors {
        log::error!("trace check: {e}");
    }
    let safe = sim.safe && trace_errors.is_empty();
    let _ = writeln!(
        text,
        "simulation: {} runs x {} steps, min p_l-p_f-h*v_f {}, min p_m-p_f-h*v_f-delta_p {}",
        sim.runs,
        sim.steps_per_run,
        num(sim.min_spec),
        num(sim.min_dynamics_guarantee)
    );
    let mut sim_json = serde_json::to_value(&sim).expect("summary serialises");
    sim_json["trace_check_errors"] = json!(trace_errors);
    if !safe {
        finish(&mut m, "simulation-violation", Some(&satisfaction), Some(sim_json), &text, out)?;
        return Ok(Exit::SimulationViolation);
    }
    finish(&mut m, "verified+simulated", Some(&satisfaction), Some(sim_json), &text, out)?;
    Ok(Exit::Ok)
}

// --- export ------------------------------------------------------------------

/// File names written by `export`.
pub const EXPORT_FILES: [&str; 9] = [
    "c1.json",
    "c2.json",
    "c.json",
    "system.json",
    "init.json",
    "scenario.json",
    "extend-assumptions.json",
    "extend-assumptions-upstream.json",
    "extend-assumptions-both.json",
];

pub fn export(a: &ExportArgs, out: &mut dyn Write) -> Result<Exit, CliError> {
    let mut scenario = Scenario::default();
    scenario.params.apply_overrides(&a.overrides)?;
    for w in scenario.params.validate()? {
        log::warn!("{w}");
    }
    let p = &scenario.params;
    fs::create_dir_all(&a.out).map_err(CliError::output(&a.out))?;
    let path = |i: usize| a.out.join(EXPORT_FILES[i]);
    let io = |path: std::path::PathBuf| {
        move |e: linag_core::contracts::FormatError| match e {
            linag_core::contracts::FormatError::Io { source, .. } => CliError::Output { path, source },
            other => CliError::Format(other),
        }
    };
    save_contract(&build_contract_c1(p), path(0)).map_err(io(path(0)))?;
    save_contract(&build_contract_c2(p), path(1)).map_err(io(path(1)))?;
    save_contract(&build_contract_c(p), path(2)).map_err(io(path(2)))?;
    let (sys, init) = build_follower_system(p)?;
    save_system(&sys, "follower closed loop", path(3)).map_err(io(path(3)))?;
    save_init(&init, sys.input_dim, path(4)).map_err(io(path(4)))?;
    fs::write(path(5), scenario.to_json() + "\n").map_err(CliError::output(path(5)))?;
    for (i, t) in stacked_triples(&build_triple(p)).iter().enumerate() {
        write_json(&path(6 + i), &ExtendFile::from_triple(t))?;
    }
    for f in EXPORT_FILES {
        let _ = writeln!(out, "{}", a.out.join(f).display());
    }
    Ok(Exit::Ok)
}
