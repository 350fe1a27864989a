//! Command-line front end. `run` returns the process exit code.
//!
//! Exit codes: 0 all checks pass, 1 an identity, audit or convergence check
//! failed, 2 bad configuration or input outside the chart.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};

use crate::chart::{DerivativeEngine, ScalarSpec};
use crate::config::{Overrides, RunConfig};
use crate::error::{Error, Result};
use crate::identities::run_suite;
use crate::mass::{
    adapted_metric_check, conformal_change_prediction, decay_gate, invariance_audit, polarization, riemannian_mass_unchecked,
    MassQuery,
};

pub const OUT_ENV: &str = "WEYL_ALF_OUT";

#[derive(Debug, Parser)]
#[command(name = "weyl-alf", version, about = "Weyl-structure identities and ALF conformal masses")]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// TOML run configuration
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory; reports go to stdout when unset
    #[arg(long, global = true, env = OUT_ENV)]
    pub out: Option<PathBuf>,
    /// Radius schedule `r0:rmax:count` (geometric)
    #[arg(long, global = true)]
    pub radii: Option<String>,
    /// Tolerance for the operator identities and the mass audits
    #[arg(long, global = true)]
    pub tol: Option<f64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the operator-identity and Bochner suites
    Verify,
    /// Compute Q_g and the conformal mass with their polarized quadratic forms
    Mass,
    /// Audit gauge invariance and the conformal-change law over a family of factors
    Sweep,
    /// Summarize the reports found in the output directory
    Report,
}

/// JSON-lines output, buffered so nothing is written when a later step fails.
struct Sink {
    lines: Vec<String>,
    summary: String,
}

impl Sink {
    fn new() -> Self {
        Sink {
            lines: Vec::new(),
            summary: String::new(),
        }
    }

    fn record<T: Serialize>(&mut self, kind: &str, body: &T) -> Result<()> {
        let mut v = serde_json::to_value(body)?;
        let obj = match v.as_object_mut() {
            Some(o) => {
                let mut tagged = serde_json::Map::new();
                tagged.insert("record".into(), Value::String(kind.into()));
                tagged.extend(std::mem::take(o));
                Value::Object(tagged)
            }
            None => json!({ "record": kind, "value": v }),
        };
        self.lines.push(serde_json::to_string(&obj)?);
        Ok(())
    }

    fn flush(&self, out: Option<&Path>, name: &str, extra: &[(String, String)]) -> Result<()> {
        let body: String = self.lines.iter().map(|l| format!("{l}\n")).collect();
        match out {
            Some(dir) => {
                std::fs::create_dir_all(dir)?;
                std::fs::write(dir.join(format!("{name}.jsonl")), body)?;
                for (file, text) in extra {
                    std::fs::write(dir.join(file), text)?;
                }
                print!("{}", self.summary);
            }
            None => {
                let mut so = std::io::stdout().lock();
                so.write_all(body.as_bytes())?;
                eprint!("{}", self.summary);
            }
        }
        Ok(())
    }
}

pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_config_or_domain() {
                2
            } else {
                1
            }
        }
    }
}

fn resolve(common: &Common) -> Result<RunConfig> {
    let base = match &common.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(t) = common.tol {
        if !(t > 0.0 && t.is_finite()) {
            return Err(Error::Config(format!("--tol must be positive, got {t}")));
        }
    }
    base.resolve(&Overrides {
        seed: common.seed,
        out: common.out.clone(),
        radii: common.radii.clone(),
        tol: common.tol,
    })
}

fn dispatch(cli: &Cli) -> Result<i32> {
    match cli.command {
        Command::Report => report(cli.common.out.as_deref()),
        Command::Verify => verify(&resolve(&cli.common)?),
        Command::Mass => mass(&resolve(&cli.common)?),
        Command::Sweep => sweep(&resolve(&cli.common)?),
    }
}

fn verify(cfg: &RunConfig) -> Result<i32> {
    let mut sink = Sink::new();
    sink.record("config", cfg)?;
    let reports = run_suite(&cfg.sampler(), &cfg.suite())?;
    let mut pass = true;
    for r in &reports {
        sink.record("identity", r)?;
        pass &= r.pass;
        let _ = writeln!(
            sink.summary,
            "{:<22} {:>4} trials  max residual {:.3e}  tol {:.1e}  {}",
            r.id.name(),
            r.trials,
            r.max_residual,
            r.tolerance,
            if r.pass { "PASS" } else { "FAIL" }
        );
    }
    sink.record("summary", &json!({ "pass": pass }))?;
    sink.flush(cfg.out.as_deref(), "verify", &[])?;
    Ok(if pass { 0 } else { 1 })
}

fn format_matrix(name: &str, m: usize, matrix: &[f64], eig: &[f64]) -> String {
    let mut s = format!("{name} quadratic form over X_1..X_{m}:\n");
    for b in 0..m {
        let row: Vec<String> = (0..m).map(|c| format!("{:>14.8}", matrix[b * m + c])).collect();
        let _ = writeln!(s, "  [{}]", row.join(" "));
    }
    let e: Vec<String> = eig.iter().map(|v| format!("{v:.8}")).collect();
    let _ = writeln!(s, "  eigenvalues: {}", e.join(", "));
    s
}

fn mass(cfg: &RunConfig) -> Result<i32> {
    let de = DerivativeEngine::dual();
    let ws = cfg.structure()?;
    let m = cfg.model.m;
    let mut sink = Sink::new();
    sink.record("config", cfg)?;
    for e in decay_gate(&ws, true, &de, &cfg.probes)? {
        sink.record("decay_probe", &e)?;
    }
    let z = cfg.z.clone().expect("resolved");
    let mut q = MassQuery::new(ws, z, cfg.radii.radii());
    q.quadrature = cfg.quadrature;
    q.tol_conv = cfg.tolerances.conv;
    let single_q = riemannian_mass_unchecked(&q, &de)?;
    let single = crate::mass::conformal_mass_unchecked(&q, &de)?;
    sink.record("mass_q", &single_q)?;
    sink.record("mass_conformal", &single)?;
    let pq = polarization(&q, false, &de)?;
    let pd = polarization(&q, true, &de)?;
    let mut converged = single.converged && pq.converged && pd.converged;
    for (kind, p) in [("Q", &pq), ("conformal", &pd)] {
        sink.record(
            "quadratic_form",
            &json!({ "kind": kind, "m": m, "matrix": p.matrix, "eigenvalues": p.eigenvalues, "converged": p.converged }),
        )?;
        sink.summary.push_str(&format_matrix(kind, m, &p.matrix, &p.eigenvalues));
    }
    if !converged {
        let _ = writeln!(sink.summary, "mass sequence did not converge within tol_conv = {:e}", q.tol_conv);
    }
    converged &= single_q.converged;
    sink.record("summary", &json!({ "converged": converged }))?;
    sink.flush(cfg.out.as_deref(), "mass", &[("mass.csv".into(), single.to_csv())])?;
    Ok(if converged { 0 } else { 1 })
}

fn sweep(cfg: &RunConfig) -> Result<i32> {
    let de = DerivativeEngine::dual();
    let ws = cfg.structure()?;
    let m = cfg.model.m;
    let mut sink = Sink::new();
    sink.record("config", cfg)?;
    decay_gate(&ws, true, &de, &cfg.probes)?;
    // every factor is gated before any audit runs
    for f in &cfg.sweep.factors {
        let check = adapted_metric_check(&cfg.model, f, &de, &cfg.probes)?;
        for e in check.probes {
            e.into_result()?;
        }
    }
    let mut q = MassQuery::new(ws, vec![0.0; m], cfg.radii.radii());
    q.quadrature = cfg.quadrature;
    q.tol_conv = cfg.tolerances.conv;
    let tol = cfg.tolerances.mass;
    let mut pass = true;
    for (i, f) in cfg.sweep.factors.iter().enumerate() {
        for b in 0..m {
            let mut z = vec![0.0; m];
            z[b] = 1.0;
            let audit = invariance_audit(&q.with_z(z.clone()), f, tol, &de)?;
            let pred = conformal_change_prediction(&cfg.model, f, &z, &q.radii, &q.quadrature, &de)?;
            let dq_rel = (audit.delta_q_direct - pred.predicted).abs() / audit.delta_q_direct.abs().max(1e-8);
            let ok = audit.pass && dq_rel < tol;
            pass &= ok;
            sink.record(
                "sweep_entry",
                &json!({
                    "factor_index": i,
                    "factor": factor_value(f),
                    "audit": audit,
                    "delta_q_predicted": pred.predicted,
                    "delta_q_relative_error": dq_rel,
                    "pass": ok,
                }),
            )?;
            let _ = writeln!(
                sink.summary,
                "factor {i} Z=X_{}  m^D(g) {:.8}  m^D(fg) {:.8}  rel {:.2e}  dQ {:.8} vs {:.8}  {}",
                b + 1,
                audit.mass_g,
                audit.mass_fg,
                audit.relative,
                audit.delta_q_direct,
                pred.predicted,
                if ok { "PASS" } else { "FAIL" }
            );
        }
    }
    sink.record("summary", &json!({ "pass": pass }))?;
    sink.flush(cfg.out.as_deref(), "sweep", &[])?;
    Ok(if pass { 0 } else { 1 })
}

fn factor_value(f: &ScalarSpec) -> Value {
    serde_json::to_value(f).unwrap_or(Value::Null)
}

fn report(out: Option<&Path>) -> Result<i32> {
    let dir = out.ok_or_else(|| Error::Config(format!("report needs --out or {OUT_ENV}")))?;
    let mut any = false;
    let mut failed = false;
    for name in ["verify", "mass", "sweep"] {
        let path = dir.join(format!("{name}.jsonl"));
        if !path.exists() {
            continue;
        }
        any = true;
        let text = std::fs::read_to_string(&path)?;
        let mut records = 0usize;
        let mut bad = Vec::new();
        for line in text.lines().filter(|l| !l.trim().is_empty()) {
            let v: Value = serde_json::from_str(line)?;
            records += 1;
            let fails = v.get("pass") == Some(&Value::Bool(false)) || v.get("converged") == Some(&Value::Bool(false));
            if fails {
                let label = v
                    .get("id")
                    .or_else(|| v.get("factor_index"))
                    .map(|x| x.to_string())
                    .unwrap_or_else(|| v.get("record").map(|x| x.to_string()).unwrap_or_default());
                bad.push(label);
            }
        }
        failed |= !bad.is_empty();
        if bad.is_empty() {
            println!("{name}: {records} records, all passing");
        } else {
            println!("{name}: {records} records, failing: {}", bad.join(", "));
        }
    }
    if !any {
        return Err(Error::Config(format!("no reports found in {}", dir.display())));
    }
    Ok(if failed { 1 } else { 0 })
}
