//! `dstab`: scenario-driven front end for the certification library.
//!
//! Exit codes: 0 ok / certified, 1 not certified, 2 input error, 3 numerical
//! failure. Errors are reported on stderr as a one-line JSON object.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use dstab_core::dstability::{assemble_closed_loop, verify_region, Theorem};
use dstab_core::positivity::check_positive_siso;
use dstab_core::region::Region;
use dstab_core::report::{poles_csv, to_json, trajectory_csv};
use dstab_core::scenario::{RegionSpec, Scenario};
use dstab_core::sim::{metrics, simulate};
use dstab_core::sweep::soundness_sweep;
use dstab_core::{Complex64, Error};

#[derive(Parser)]
#[command(name = "dstab", version, about = "Regional pole placement certificates for DC microgrids")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Scenario JSON file.
    scenario: PathBuf,
    /// Replace the scenario region, e.g. `lhp:-8`, `sec:1.309`, `hs:75.4`,
    /// `general:θ₀,ω₀,σ₀`. Repeat for an intersection.
    #[arg(long = "region")]
    region: Vec<String>,
    /// Write the main output here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Closed-loop poles with per-region margins (CSV).
    Poles(Common),
    /// Broadcast grid code per region part (JSON).
    Gridcode(Common),
    /// Certify with Thm. 1 or Thm. 2; exit 0 iff certified.
    Check {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u8).range(1..=2))]
        theorem: u8,
    },
    /// Local synthesis bounds and compliance per source (JSON).
    Synthesize(Common),
    /// Disturbance response: trajectory CSV on `--out`/stdout, metrics JSON
    /// on `--metrics-out`/stderr.
    Simulate {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        metrics_out: Option<PathBuf>,
    },
    /// Positivity of every loop-transformed subsystem (JSON).
    Positivity(Common),
    /// Seeded Thm. 1 soundness sweep (JSON); exit 1 on a counterexample.
    Sweep {
        #[arg(long, default_value_t = 2024)]
        seed: u64,
        #[arg(long, default_value_t = 300)]
        target: usize,
        #[arg(long, default_value_t = 20_000)]
        max_draws: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

struct Failure {
    code: u8,
    kind: &'static str,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let (code, kind) = if e.is_numerical() { (3, "numerical") } else { (2, "input") };
        Failure { code, kind, message: e.to_string() }
    }
}

fn io_failure(path: &Path, e: std::io::Error) -> Failure {
    Failure { code: 2, kind: "io", message: format!("{}: {e}", path.display()) }
}

fn load(c: &Common) -> Result<Scenario, Failure> {
    let text = std::fs::read_to_string(&c.scenario).map_err(|e| io_failure(&c.scenario, e))?;
    let mut s = Scenario::from_json(&text).map_err(|e| Failure { code: 2, kind: "schema", message: e.to_string() })?;
    if !c.region.is_empty() {
        s.region = c.region.iter().map(|r| RegionSpec::parse(r)).collect::<dstab_core::Result<_>>()?;
        // per-part indices no longer match the new parts
        s.y_s = None;
        s.validate()?;
    }
    Ok(s)
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(p) => std::fs::write(p, text).map_err(|e| io_failure(p, e)),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// Shifts node indices in library reports to the 1-based numbering of
/// scenario files.
fn one_based(v: &mut Value) {
    match v {
        Value::Object(map) => {
            for (k, val) in map.iter_mut() {
                match (k.as_str(), &mut *val) {
                    ("node", Value::Number(n)) => *val = bump(n),
                    ("failing_nodes", Value::Array(items)) => {
                        for it in items.iter_mut() {
                            if let Value::Number(n) = it {
                                *it = bump(n);
                            }
                        }
                    }
                    _ => one_based(val),
                }
            }
        }
        Value::Array(items) => items.iter_mut().for_each(one_based),
        _ => {}
    }
}

fn bump(n: &serde_json::Number) -> Value {
    n.as_u64().map_or_else(|| Value::Number(n.clone()), |k| json!(k + 1))
}

fn report(mut value: Value) -> String {
    one_based(&mut value);
    to_json(&value)
}

fn run(cli: Cli) -> Result<u8, Failure> {
    match cli.command {
        Command::Poles(c) => {
            let s = load(&c)?;
            let v = verify_region(&s.microgrid()?.system_model()?)?;
            emit(c.out.as_deref(), &poles_csv(&v))?;
            Ok(0)
        }
        Command::Gridcode(c) => {
            let s = load(&c)?;
            let gcs = s.microgrid()?.grid_codes()?;
            let parts: Vec<Value> = gcs
                .iter()
                .map(|g| {
                    let mut v = serde_json::to_value(g).expect("grid code serializes");
                    v.as_object_mut()
                        .expect("struct")
                        .insert("label".into(), json!(g.region.label()));
                    v
                })
                .collect();
            emit(c.out.as_deref(), &report(json!({ "scenario": s.name, "grid_codes": parts })))?;
            Ok(0)
        }
        Command::Check { common, theorem } => {
            let s = load(&common)?;
            let th = if theorem == 1 { Theorem::Thm1 } else { Theorem::Thm2 };
            let rep = s.microgrid()?.certify(th, s.y_s.as_deref())?;
            emit(common.out.as_deref(), &report(serde_json::to_value(&rep).expect("report serializes")))?;
            Ok(if rep.certified { 0 } else { 1 })
        }
        Command::Synthesize(c) => {
            let s = load(&c)?;
            let syn = s.microgrid()?.synthesis()?;
            emit(c.out.as_deref(), &report(json!({ "scenario": s.name, "parts": syn })))?;
            Ok(0)
        }
        Command::Simulate { common, metrics_out } => {
            let s = load(&common)?;
            let mg = s.microgrid()?;
            let d = s.disturbance_spec().ok_or_else(|| Failure {
                code: 2,
                kind: "schema",
                message: "scenario has no disturbance block".into(),
            })?;
            let settings = s.sim_settings();
            let cl = assemble_closed_loop(&mg.system_model()?)?;
            let sim = simulate(&cl, &mg.disturbance_pulse(&d)?, settings.t_end_s, settings.dt_s)?;
            let m = metrics(&sim.trajectory, settings.band)?;
            emit(common.out.as_deref(), &trajectory_csv(&sim.trajectory))?;
            let mj = report(json!({ "scenario": s.name, "band": settings.band, "metrics": m, "warnings": sim.warnings }));
            match metrics_out {
                Some(p) => std::fs::write(&p, mj).map_err(|e| io_failure(&p, e))?,
                None => eprint!("{mj}"),
            }
            Ok(0)
        }
        Command::Positivity(c) => {
            let s = load(&c)?;
            let mg = s.microgrid()?;
            let gcs = mg.grid_codes()?;
            let ys = match &s.y_s {
                Some(v) => v.clone(),
                None => mg.default_indices(&mg.synthesis()?),
            };
            let m = mg.system_model_with_indices(&gcs, &ys)?;
            let mut parts = Vec::new();
            for (part, lp) in m.region.parts().iter().zip(&m.loop_params) {
                let (a, b) = part.affine_map();
                let mut nodes = Vec::new();
                for (k, g) in m.subsystems.iter().enumerate() {
                    let h = g
                        .substitute_affine(a, b)?
                        .rotate(lp.phi[k])
                        .feedback(Complex64::new(lp.rho[k], 0.0))?;
                    nodes.push(json!({
                        "node": k,
                        "kind": mg.devices[k].kind(),
                        "rho": lp.rho[k],
                        "report": check_positive_siso(&h)?,
                    }));
                }
                parts.push(json!({ "region": part.label(), "nodes": nodes }));
            }
            emit(c.out.as_deref(), &report(json!({ "scenario": s.name, "parts": parts })))?;
            Ok(0)
        }
        Command::Sweep { seed, target, max_draws, out } => {
            let summary = soundness_sweep(seed, target, max_draws);
            emit(out.as_deref(), &to_json(&summary))?;
            Ok(if summary.counterexamples.is_empty() { 0 } else { 1 })
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("{}", json!({ "error": f.kind, "message": f.message }));
            ExitCode::from(f.code)
        }
    }
}
