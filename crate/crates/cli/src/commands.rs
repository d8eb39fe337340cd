use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use log::{error, info};
use serde::Serialize;
use serde_json::{json, Value};

use mg_spectral::config::{Domain, DriftKind, Horizon, InitialKind, NormTarget, SimConfig};
use mg_spectral::diagnostics::{
    bootstrap_check, bootstrap_orders, curved_region_probe, decay_fit, empirical_cs, read_records_csv, write_records_csv,
    DiagnosticsRecord,
};
use mg_spectral::dynamics::{linear_symbol, velocity, ModelParams};
use mg_spectral::fields::SpectralField;
use mg_spectral::lattice::{parse_rational, ConeSpec, LineSpec};
use mg_spectral::picard::{picard_solve, velocity_hs_norm, Drift, PicardError, PicardReport, PicardSettings};
use mg_spectral::presets::{self, PresetKind};
use mg_spectral::snapshot::write_snapshot;
use mg_spectral::symbols::{asymptotic_probe, cone_bounds, geometric_sweep, line_constants, SymbolTable};
use mg_spectral::theory::{epsilon0, t_star_eps, theoretical_times};
use mg_spectral::timestepping::{integrate, State, TimestepError, Trajectory};
use mg_spectral::{config::parse_direction, fields::GridSpec};

use crate::manifest::RunManifest;
use crate::{Common, ReportArgs, RunArgs, SymbolArgs, EXIT_BLOWUP, EXIT_CONFIG, EXIT_INVARIANT, EXIT_OK};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Line,
    Full,
}

fn out_root(common: &Common) -> PathBuf {
    common
        .out
        .clone()
        .or_else(|| std::env::var_os("MG_SPECTRAL_OUT").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("mg-spectral-out"))
}

fn write_json(path: &Path, v: &impl Serialize) -> std::io::Result<()> {
    fs::write(path, serde_json::to_string_pretty(v).expect("JSON serializes") + "\n")
}

struct Job {
    name: String,
    cfg: SimConfig,
    text: String,
}

fn load_jobs(run: &RunArgs, common: &Common, kind: PresetKind) -> Result<Vec<Job>, String> {
    let mut sources: Vec<(String, String)> = Vec::new();
    if let Some(path) = &run.config {
        let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        sources.push((String::new(), text));
    }
    for name in &run.preset {
        if name == "all" {
            for p in presets::PRESETS.iter().filter(|p| p.kind == kind) {
                sources.push((p.name.to_owned(), p.text.to_owned()));
            }
            continue;
        }
        let p = presets::find(name).ok_or_else(|| {
            let known: Vec<_> = presets::PRESETS.iter().map(|p| p.name).collect();
            format!("unknown preset {name:?} (known: {})", known.join(", "))
        })?;
        sources.push((p.name.to_owned(), p.text.to_owned()));
    }
    if sources.is_empty() {
        return Err("need --config PATH or --preset NAME".into());
    }
    sources
        .into_iter()
        .map(|(label, text)| {
            let mut cfg = SimConfig::from_toml(&text).map_err(|e| format!("{}: {e}", if label.is_empty() { "config" } else { &label }))?;
            if let Some(seed) = common.seed {
                cfg.run.seed = seed;
            }
            let text = cfg.to_toml();
            Ok(Job {
                name: cfg.run.name.clone(),
                cfg,
                text,
            })
        })
        .collect()
}

/// Runs jobs on up to `jobs` threads; returns the worst exit code.
fn run_batch(jobs: Vec<Job>, threads: usize, f: impl Fn(&Job) -> u8 + Sync) -> u8 {
    let next = AtomicUsize::new(0);
    let worst = Mutex::new(EXIT_OK);
    std::thread::scope(|s| {
        for _ in 0..threads.clamp(1, jobs.len().max(1)) {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                let Some(job) = jobs.get(i) else { break };
                let code = f(job);
                let mut w = worst.lock().expect("no poisoned lock");
                *w = (*w).max(code);
            });
        }
    });
    worst.into_inner().expect("no poisoned lock")
}

fn fail(code: u8, msg: impl std::fmt::Display) -> u8 {
    error!("{msg}");
    eprintln!("error: {msg}");
    code
}

#[derive(Debug, Serialize)]
struct Check {
    name: String,
    value: f64,
    tolerance: f64,
    pass: bool,
}

impl Check {
    fn at_most(name: impl Into<String>, value: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            value,
            tolerance,
            pass: value <= tolerance,
        }
    }
}

fn max_of(records: &[DiagnosticsRecord], f: impl Fn(&DiagnosticsRecord) -> f64) -> f64 {
    records.iter().map(f).fold(0.0, f64::max)
}

fn norms_json(r: &DiagnosticsRecord) -> Value {
    json!({
        "t": r.t,
        "l2": r.l2,
        "hs": r.hs.iter().map(|(s, v)| json!({"s": s, "norm": v})).collect::<Vec<_>>(),
        "sqrtM3_energy": r.sqrt_m3_energy,
    })
}

fn line_data_of(cfg: &SimConfig) -> Option<LineSpec> {
    if cfg.initial.kind == InitialKind::RandomLine {
        cfg.support_line()
    } else {
        None
    }
}

/// Summary JSON and invariant checks for a finished (or blown-up) run.
fn summarize(cfg: &SimConfig, traj: &Trajectory, blowup: Option<f64>) -> (Value, Vec<Check>) {
    let recs = &traj.records;
    let a = &cfg.analysis;
    let mut checks = vec![Check::at_most("max_divergence", max_of(recs, |r| r.max_divergence), a.divergence_tolerance)];
    let mut summary = json!({
        "name": cfg.run.name,
        "scheme": cfg.run.scheme,
        "dt": traj.dt,
        "t_end": cfg.run.t_end,
        "records": recs.len(),
        "blowup_time": blowup,
        "initial": recs.first().map(norms_json),
        "final": recs.last().map(norms_json),
        "step_stats": traj.stats,
    });
    let on_line = line_data_of(cfg);
    if let Some(tol) = a.energy_tolerance {
        checks.push(Check::at_most("energy_residual", max_of(recs, |r| r.energy_residual), tol));
    }
    // On line data N vanishes and the production ratio is roundoff over roundoff.
    if on_line.is_none() && matches!(traj.initial(), Some(State::Full(_))) && traj.stats.steps > 0 {
        checks.push(Check::at_most("advection_energy_production", traj.stats.max_advection_production, 1e-12));
    }
    if let Some(line) = &on_line {
        let lc = line_constants(line).expect("validated line");
        let reference = -linear_symbol(line.direction(), &cfg.model);
        summary["line"] = json!({"direction": line.direction().as_array(), "constants": lc, "reference_rate": reference});
        checks.push(Check::at_most("leakage", max_of(recs, |r| r.leakage), a.leakage_tolerance));
        checks.push(Check::at_most("projected_mass", max_of(recs, |r| r.projected_mass), a.projected_tolerance));
        if traj.stats.steps > 0 {
            checks.push(Check::at_most("nonlinear_relative", traj.stats.max_nonlinear_relative, 1e-12));
        }
        if let Some(first) = recs.first() {
            let mut worst = 0.0f64;
            for r in recs {
                for ((_, v), (_, v0)) in r.hs.iter().zip(&first.hs) {
                    if *v0 > 0.0 {
                        worst = worst.max(v / v0 - 1.0);
                    }
                }
            }
            checks.push(Check::at_most("maximum_principle_excess", worst.max(0.0), 1e-12));
        }
        let mut fits = Vec::new();
        for &s in &a.sobolev_orders {
            match decay_fit(recs, s, Some(reference)) {
                Ok(fit) => {
                    checks.push(Check::at_most(format!("decay_rate_s{s}"), fit.deviation().unwrap_or(f64::NAN), a.decay_tolerance));
                    fits.push(serde_json::to_value(&fit).expect("serializes"));
                }
                Err(e) => fits.push(json!({"s": s, "error": e.to_string()})),
            }
        }
        summary["decay_fits"] = Value::Array(fits);
        let (s_low, kappa) = bootstrap_orders(a.alpha, a.delta);
        let s_top = a.sobolev_orders.iter().copied().fold(0.0, f64::max);
        summary["empirical_cs"] = match empirical_cs(recs, s_top, s_low, &lc) {
            Ok(c) => serde_json::to_value(c).expect("serializes"),
            Err(e) => json!({"error": e.to_string()}),
        };
        if let Some(State::Line(theta0)) = traj.initial() {
            summary["theoretical_times"] = match theoretical_times(theta0, s_low, &lc, &a.constants(), Some(a.alpha), None) {
                Ok(t) => serde_json::to_value(t).expect("serializes"),
                Err(e) => json!({"error": e.to_string()}),
            };
        }
        if a.bootstrap {
            let eps = match &cfg.initial.normalize_value {
                Some(NormTarget::Value(v)) => Ok(*v),
                _ => epsilon0(a.alpha, &lc, &a.constants()),
            };
            summary["bootstrap"] = match eps.map_err(|e| e.to_string()).and_then(|eps| {
                bootstrap_check(recs, eps, lc.m_lower, a.alpha, a.delta).map_err(|e| e.to_string())
            }) {
                Ok(rep) => {
                    checks.push(Check {
                        name: "bootstrap".into(),
                        value: rep.violations.len() as f64,
                        tolerance: 0.0,
                        pass: rep.holds() && rep.low_margin > 1.0 && rep.kappa_margin > 1.0,
                    });
                    json!({"report": rep, "kappa": kappa})
                }
                Err(e) => {
                    checks.push(Check {
                        name: "bootstrap".into(),
                        value: f64::NAN,
                        tolerance: 0.0,
                        pass: false,
                    });
                    json!({"error": e})
                }
            };
        }
    } else if let Some(line) = cfg.support_line() {
        checks.push(Check::at_most("leakage", max_of(recs, |r| r.leakage), a.leakage_tolerance));
        summary["line"] = json!({"direction": line.direction().as_array()});
    }
    if cfg.initial.kind == InitialKind::Curved {
        summary["curved_probe"] = match curved_region_probe(&cfg.initial.k1) {
            Ok(p) => serde_json::to_value(p).expect("serializes"),
            Err(e) => json!({"error": e.to_string()}),
        };
    }
    summary["checks"] = serde_json::to_value(&checks).expect("serializes");
    (summary, checks)
}

fn simulate_one(mode: Mode, job: &Job, root: &Path) -> u8 {
    let cfg = &job.cfg;
    match (mode, cfg.domain()) {
        (_, Err(e)) => return fail(EXIT_CONFIG, format!("{}: {e}", job.name)),
        (Mode::Line, Ok(Domain::Full { .. })) => {
            return fail(EXIT_CONFIG, format!("{}: line-run needs a [line] section without embed = true", job.name))
        }
        (Mode::Full, Ok(Domain::Line { .. })) => {
            return fail(EXIT_CONFIG, format!("{}: full-run needs a cube domain (use line-run or set line.embed = true)", job.name))
        }
        _ => {}
    }
    let dir = root.join(&job.name);
    if let Err(e) = fs::create_dir_all(dir.join("snapshots")) {
        return fail(EXIT_CONFIG, format!("{}: {e}", dir.display()));
    }
    let command = if mode == Mode::Line { "line-run" } else { "full-run" };
    let mut manifest = RunManifest::new(&job.name, command, &job.text, Some(cfg.run.seed));
    let (traj, blowup) = match integrate(cfg) {
        Ok(t) => (t, None),
        Err(TimestepError::NonFinite { time, trajectory }) => (*trajectory, Some(time)),
        Err(e) => return fail(EXIT_CONFIG, format!("{}: {e}", job.name)),
    };
    let (summary, checks) = summarize(cfg, &traj, blowup);
    let io = (|| -> Result<(), Box<dyn std::error::Error>> {
        let csv = dir.join("diagnostics.csv");
        let mut w = std::io::BufWriter::new(fs::File::create(&csv)?);
        write_records_csv(&mut w, &traj.records)?;
        std::io::Write::flush(&mut w)?;
        manifest.add(&dir, &csv);
        fs::write(dir.join("config.toml"), &job.text)?;
        manifest.add(&dir, &dir.join("config.toml"));
        for (i, (t, state)) in traj.snapshots.iter().enumerate() {
            if state.coefficients().iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
                continue;
            }
            let (bin, meta) = write_snapshot(&dir.join("snapshots"), &format!("state_{i:04}"), *t, state, &cfg.model)?;
            manifest.add(&dir, &bin);
            manifest.add(&dir, &meta);
        }
        let sp = dir.join("summary.json");
        write_json(&sp, &summary)?;
        manifest.add(&dir, &sp);
        manifest.wall_seconds = traj.wall_seconds;
        manifest.write(&dir)?;
        Ok(())
    })();
    if let Err(e) = io {
        return fail(EXIT_CONFIG, format!("{}: writing outputs: {e}", job.name));
    }
    for c in &checks {
        let verdict = if c.pass { "ok" } else { "FAIL" };
        println!("{}: {} = {:e} (tolerance {:e}) {verdict}", job.name, c.name, c.value, c.tolerance);
    }
    if let Some(t) = blowup {
        println!("{}: non-finite state at t = {t}", job.name);
        return EXIT_BLOWUP;
    }
    info!("{}: outputs in {}", job.name, dir.display());
    if checks.iter().all(|c| c.pass) {
        EXIT_OK
    } else {
        EXIT_INVARIANT
    }
}

pub fn simulate(mode: Mode, run: &RunArgs, common: &Common) -> u8 {
    let kind = if mode == Mode::Line { PresetKind::LineRun } else { PresetKind::FullRun };
    let jobs = match load_jobs(run, common, kind) {
        Ok(j) => j,
        Err(e) => return fail(EXIT_CONFIG, e),
    };
    let root = out_root(common);
    run_batch(jobs, common.jobs, |job| simulate_one(mode, job, &root))
}

fn picard_table(report: &PicardReport) -> String {
    let mut out = String::from("n,r_tilde,ratio\n");
    for (i, r) in report.r_tilde.iter().enumerate() {
        let n = i + 1;
        let ratio = report.ratio(n).map(|q| format!("{q:e}")).unwrap_or_default();
        out.push_str(&format!("{n},{r:e},{ratio}\n"));
    }
    out
}

fn picard_one(job: &Job, root: &Path) -> u8 {
    let cfg = &job.cfg;
    let theta0: SpectralField = match cfg.initial_state() {
        Ok(State::Full(f)) => f,
        Ok(State::Line(_)) => return fail(EXIT_CONFIG, format!("{}: picard runs on the cube (set line.embed = true)", job.name)),
        Err(e) => return fail(EXIT_CONFIG, format!("{}: {e}", job.name)),
    };
    let p = &cfg.picard;
    let (drift, v) = match p.drift {
        DriftKind::Frozen => match cfg.picard_drift() {
            Ok(v) => (Drift::Frozen(v.clone()), v),
            Err(e) => return fail(EXIT_CONFIG, format!("{}: {e}", job.name)),
        },
        DriftKind::SelfConsistent => (Drift::SelfConsistent, velocity(&theta0)),
    };
    let v_norm = velocity_hs_norm(&v, p.s);
    let t_star = t_star_eps(p.eps, v_norm, cfg.analysis.c_s).ok();
    let horizon = match &p.horizon {
        Horizon::Value(h) => *h,
        Horizon::Named(n) if n == "t_star" => match t_star {
            Some(t) => t,
            None => return fail(EXIT_CONFIG, format!("{}: T_star_eps undefined (need eps > 0, C_s and a nonzero drift)", job.name)),
        },
        Horizon::Named(n) => return fail(EXIT_CONFIG, format!("{}: unknown horizon {n:?}", job.name)),
    };
    let settings = PicardSettings {
        horizon,
        steps: p.steps,
        n_max: p.n_max,
        s: p.s,
        params: ModelParams {
            eps_hyper: p.eps,
            ..cfg.model
        },
    };
    let started = std::time::Instant::now();
    let (report, verdict) = match picard_solve(&theta0, &drift, &settings) {
        Ok(r) if r.is_exact_fixed_point() => (r, "exact_fixed_point"),
        Ok(r) => (r, "completed"),
        Err(PicardError::NoConvergence { report, .. }) => (*report, "no_convergence"),
        Err(e) => return fail(EXIT_CONFIG, format!("{}: {e}", job.name)),
    };
    let guaranteed = t_star.is_some_and(|t| horizon <= t * (1.0 + 1e-12));
    let worst = report.ratios.iter().filter_map(|(_, r)| *r).fold(0.0, f64::max);
    let contraction = verdict != "no_convergence" && report.ratios.iter().all(|(_, r)| r.map_or(true, |q| q <= p.ratio_tolerance));
    let dir = root.join(&job.name);
    let mut manifest = RunManifest::new(&job.name, "picard", &job.text, Some(cfg.run.seed));
    let summary = json!({
        "name": job.name,
        "drift": p.drift,
        "eps": p.eps,
        "s": p.s,
        "drift_hs_norm": v_norm,
        "t_star_eps": t_star,
        "horizon": horizon,
        "guaranteed_regime": guaranteed,
        "verdict": verdict,
        "ratio_tolerance": p.ratio_tolerance,
        "max_ratio": worst,
        "contraction": contraction,
        "report": report,
    });
    let io = (|| -> std::io::Result<()> {
        fs::create_dir_all(&dir)?;
        let csv = dir.join("picard.csv");
        fs::write(&csv, picard_table(&report))?;
        manifest.add(&dir, &csv);
        fs::write(dir.join("config.toml"), &job.text)?;
        manifest.add(&dir, &dir.join("config.toml"));
        let js = dir.join("picard.json");
        write_json(&js, &summary)?;
        manifest.add(&dir, &js);
        manifest.wall_seconds = started.elapsed().as_secs_f64();
        manifest.write(&dir)?;
        Ok(())
    })();
    if let Err(e) = io {
        return fail(EXIT_CONFIG, format!("{}: writing outputs: {e}", job.name));
    }
    for (n, r) in &report.ratios {
        match r {
            Some(q) => println!("{}: ratio n={n} {q:.6e}", job.name),
            None => println!("{}: ratio n={n} undefined (exact fixed point)", job.name),
        }
    }
    println!("{}: verdict {verdict}, max ratio {worst:.4e}, guaranteed regime {guaranteed}", job.name);
    if guaranteed && !contraction {
        EXIT_INVARIANT
    } else {
        EXIT_OK
    }
}

pub fn picard(run: &RunArgs, common: &Common) -> u8 {
    let jobs = match load_jobs(run, common, PresetKind::Picard) {
        Ok(j) => j,
        Err(e) => return fail(EXIT_CONFIG, e),
    };
    let root = out_root(common);
    run_batch(jobs, common.jobs, |job| picard_one(job, &root))
}

fn parse_probe(s: &str) -> Option<f64> {
    s.strip_prefix("r=").unwrap_or(s).trim().parse().ok()
}

fn parse_range(s: &str) -> Option<(i64, i64)> {
    let (a, b) = s.split_once(':')?;
    Some((a.trim().parse().ok()?, b.trim().parse().ok()?))
}

pub fn symbols(args: &SymbolArgs, common: &Common) -> u8 {
    let root = out_root(common);
    if let Err(e) = fs::create_dir_all(&root) {
        return fail(EXIT_CONFIG, format!("{}: {e}", root.display()));
    }
    let mut out = serde_json::Map::new();
    let nothing = args.probe.is_none() && args.line.is_none() && args.cone.is_none();
    if let Some(n) = args.n.or(if nothing { Some(8) } else { None }) {
        let grid = match GridSpec::new(n, 1.5) {
            Ok(g) => g,
            Err(e) => return fail(EXIT_CONFIG, e),
        };
        let path = root.join(format!("symbols_n{n}.csv"));
        let res = fs::File::create(&path).and_then(|f| {
            let mut w = std::io::BufWriter::new(f);
            SymbolTable::new(grid).write_csv(&mut w)?;
            std::io::Write::flush(&mut w)
        });
        if let Err(e) = res {
            return fail(EXIT_CONFIG, format!("{}: {e}", path.display()));
        }
        out.insert("table".into(), json!(path.to_string_lossy()));
    }
    if let Some(p) = &args.probe {
        let Some(r) = parse_probe(p) else {
            return fail(EXIT_CONFIG, format!("bad probe {p:?}; expected r=<exponent>"));
        };
        let Some((lo, hi)) = parse_range(&args.k1) else {
            return fail(EXIT_CONFIG, format!("bad k1 range {:?}; expected lo:hi", args.k1));
        };
        let sweep = geometric_sweep(lo, hi, args.points);
        let slopes = match asymptotic_probe(r, &sweep) {
            Ok(s) => s,
            Err(e) => return fail(EXIT_CONFIG, e),
        };
        let probe = json!({"r": r, "k1": [lo, hi], "points": sweep.len(), "slopes": slopes});
        if let Err(e) = write_json(&root.join("probe.json"), &probe) {
            return fail(EXIT_CONFIG, e);
        }
        out.insert("probe".into(), probe);
    }
    if let Some(l) = &args.line {
        let parts: Vec<String> = l.split(',').map(|s| s.trim().to_owned()).collect();
        let consts = match parse_direction(&parts).map_err(|e| e.to_string()).and_then(|line| line_constants(&line).map_err(|e| e.to_string())) {
            Ok(c) => c,
            Err(e) => return fail(EXIT_CONFIG, e),
        };
        if let Err(e) = write_json(&root.join("line_constants.json"), &consts) {
            return fail(EXIT_CONFIG, e);
        }
        out.insert("line_constants".into(), serde_json::to_value(consts).expect("serializes"));
    }
    if let Some(c) = &args.cone {
        let bounds = match parse_rational(c).ok_or_else(|| format!("bad aperture {c:?}")).and_then(|q| ConeSpec::new(q).map_err(|e| e.to_string())) {
            Ok(cone) => cone_bounds(&cone),
            Err(e) => return fail(EXIT_CONFIG, e),
        };
        if let Err(e) = write_json(&root.join("cone_bounds.json"), &bounds) {
            return fail(EXIT_CONFIG, e);
        }
        out.insert("cone_bounds".into(), serde_json::to_value(bounds).expect("serializes"));
    }
    println!("{}", serde_json::to_string_pretty(&Value::Object(out)).expect("serializes"));
    EXIT_OK
}

pub fn report(args: &ReportArgs, common: &Common) -> u8 {
    let csv = if args.input.is_dir() {
        args.input.join("diagnostics.csv")
    } else {
        args.input.clone()
    };
    let records = match fs::File::open(&csv)
        .map_err(|e| e.to_string())
        .and_then(|f| read_records_csv(std::io::BufReader::new(f)).map_err(|e| e.to_string()))
    {
        Ok(r) => r,
        Err(e) => return fail(EXIT_CONFIG, format!("{}: {e}", csv.display())),
    };
    let orders: Vec<f64> = records.first().map(|r| r.hs.iter().map(|(s, _)| *s).collect()).unwrap_or_default();
    let fits: Vec<Value> = orders
        .iter()
        .map(|&s| match decay_fit(&records, s, args.reference_rate) {
            Ok(f) => serde_json::to_value(f).expect("serializes"),
            Err(e) => json!({"s": s, "error": e.to_string()}),
        })
        .collect();
    let rep = json!({
        "source": csv.to_string_lossy(),
        "records": records.len(),
        "decay_fits": fits,
        "max_energy_residual": max_of(&records, |r| r.energy_residual),
        "max_leakage": max_of(&records, |r| r.leakage),
        "max_divergence": max_of(&records, |r| r.max_divergence),
        "max_projected_mass": max_of(&records, |r| r.projected_mass),
        "initial": records.first().map(norms_json),
        "final": records.last().map(norms_json),
    });
    let root = out_root(common);
    let res = fs::create_dir_all(&root).and_then(|_| write_json(&root.join("report.json"), &rep));
    if let Err(e) = res {
        return fail(EXIT_CONFIG, e);
    }
    println!("{}", serde_json::to_string_pretty(&rep).expect("serializes"));
    EXIT_OK
}

#[cfg(test)]
mod tests {
    use super::*;
    use mg_spectral::fields::SobolevNorm;

    #[test]
    fn parsers() {
        assert_eq!(parse_probe("r=0.5"), Some(0.5));
        assert_eq!(parse_probe("0.25"), Some(0.25));
        assert_eq!(parse_probe("r=x"), None);
        assert_eq!(parse_range("64:4096"), Some((64, 4096)));
        assert_eq!(parse_range("64-4096"), None);
    }

    #[test]
    fn norm_helpers() {
        let g = GridSpec::new(2, 1.5).unwrap();
        assert_eq!(SpectralField::zeros(g).l2_norm(), 0.0);
    }
}
