//! Command-line front end: solve instances, generate Ginzburg-Landau
//! instances, verify against brute-force oracles, and export objective
//! slices as CSV.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use nalgebra::DVector;

use dwell::ginzburg_landau::{build_dwp_instance, GridSpec};
use dwell::instance::DwpInstance;
use dwell::oracle;
use dwell::pipeline::{self, SolveStatus};

#[derive(Parser)]
#[command(name = "dwell", about = "Global minimization of double-well quartic polynomials")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve an instance file and report the global solution as JSON.
    Solve {
        instance: PathBuf,
        /// Tolerance on the dual stationarity residual.
        #[arg(long, default_value_t = pipeline::DEFAULT_TOL)]
        tol: f64,
        /// Write the report here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Generate the discrete Ginzburg-Landau majorant instance.
    Gl {
        s: usize,
        t: usize,
        alpha: f64,
        beta: f64,
        /// Write the instance here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare the pipeline result against brute-force oracles.
    Verify {
        instance: PathBuf,
        #[arg(long, default_value_t = 50)]
        starts: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Export a 1-D or 2-D objective slice as CSV.
    Slice {
        instance: PathBuf,
        /// One or two zero-based coordinate indices, comma separated.
        #[arg(long)]
        dims: String,
        /// Sampling interval lo:hi applied to each selected axis.
        #[arg(long, allow_hyphen_values = true)]
        range: String,
        #[arg(long, default_value_t = 100)]
        steps: usize,
        /// Fixed values i=v for the remaining coordinates (default 0).
        #[arg(long, allow_hyphen_values = true)]
        fix: Option<String>,
        /// Write the CSV here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => code,
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::from(1)
        }
    }
}

fn run(command: Command) -> Result<ExitCode, String> {
    match command {
        Command::Solve { instance, tol, out } => cmd_solve(&instance, tol, out.as_deref()),
        Command::Gl { s, t, alpha, beta, out } => cmd_gl(s, t, alpha, beta, out.as_deref()),
        Command::Verify { instance, starts, seed } => cmd_verify(&instance, starts, seed),
        Command::Slice {
            instance,
            dims,
            range,
            steps,
            fix,
            out,
        } => cmd_slice(&instance, &dims, &range, steps, fix.as_deref(), out.as_deref()),
    }
}

fn load(path: &std::path::Path) -> Result<DwpInstance, String> {
    let bytes = fs::read(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    DwpInstance::load(&bytes).map_err(|e| e.to_string())
}

fn emit(out: Option<&std::path::Path>, content: &str) -> Result<(), String> {
    match out {
        Some(path) => fs::write(path, content).map_err(|e| format!("cannot write {}: {e}", path.display())),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn cmd_solve(path: &std::path::Path, tol: f64, out: Option<&std::path::Path>) -> Result<ExitCode, String> {
    let inst = load(path)?;
    let report = pipeline::solve(&inst, tol).map_err(|e| e.to_string())?;
    let mut json = serde_json::to_string_pretty(&report).map_err(|e| e.to_string())?;
    json.push('\n');
    emit(out, &json)?;
    Ok(match report.status {
        SolveStatus::Unbounded => ExitCode::from(2),
        _ => ExitCode::SUCCESS,
    })
}

fn cmd_gl(s: usize, t: usize, alpha: f64, beta: f64, out: Option<&std::path::Path>) -> Result<ExitCode, String> {
    let spec = GridSpec::new(s, t, alpha, beta).map_err(|e| e.to_string())?;
    let inst = build_dwp_instance(&spec).map_err(|e| e.to_string())?;
    let mut bytes = inst.save();
    bytes.push(b'\n');
    let content = String::from_utf8(bytes).expect("JSON is UTF-8");
    emit(out, &content)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_verify(path: &std::path::Path, starts: usize, seed: u64) -> Result<ExitCode, String> {
    let inst = load(path)?;
    if inst.n() > 6 {
        return Err(format!(
            "verify is limited to n <= 6 (multistart), instance has n = {}",
            inst.n()
        ));
    }
    let report = pipeline::solve(&inst, pipeline::DEFAULT_TOL).map_err(|e| e.to_string())?;
    if report.status == SolveStatus::Unbounded {
        println!("pipeline: unbounded below (certificate available); oracles skipped");
        return Ok(ExitCode::SUCCESS);
    }
    let value = report.value.expect("solved report carries a value");
    println!("pipeline value: {value:.12}");

    let mut pass = true;
    let (_, ms_value) = oracle::multistart_min(&inst, starts, seed).map_err(|e| e.to_string())?;
    let ms_gap = value - ms_value;
    println!("multistart value: {ms_value:.12}  gap: {ms_gap:.3e}");
    pass &= value <= ms_value + 1e-6;

    if inst.n() <= 3 {
        let radius = 1.5 * DVector::from_vec(report.x.clone().expect("solved report carries x")).amax().max(4.0);
        let bounds = vec![(-radius, radius); inst.n()];
        let steps = match inst.n() {
            1 => 20_000,
            2 => 600,
            _ => 120,
        };
        let (_, grid_value) = oracle::grid_min(&inst, &bounds, steps).map_err(|e| e.to_string())?;
        let grid_gap = value - grid_value;
        println!("grid value: {grid_value:.12}  gap: {grid_gap:.3e}");
        pass &= value <= grid_value + 1e-6;
    }

    Ok(if pass {
        ExitCode::SUCCESS
    } else {
        println!("FAIL: pipeline value exceeds an oracle value by more than 1e-6");
        ExitCode::from(1)
    })
}

fn parse_dims(dims: &str, n: usize) -> Result<Vec<usize>, String> {
    let parsed: Vec<usize> = dims
        .split(',')
        .map(|p| p.trim().parse::<usize>().map_err(|e| format!("bad dim `{p}`: {e}")))
        .collect::<Result<_, _>>()?;
    if parsed.is_empty() || parsed.len() > 2 {
        return Err("--dims takes one or two comma-separated indices".into());
    }
    for &d in &parsed {
        if d >= n {
            return Err(format!("dim index {d} out of range for n = {n}"));
        }
    }
    if parsed.len() == 2 && parsed[0] == parsed[1] {
        return Err("--dims indices must be distinct".into());
    }
    Ok(parsed)
}

fn parse_range(range: &str) -> Result<(f64, f64), String> {
    let (lo, hi) = range
        .split_once(':')
        .ok_or_else(|| format!("bad --range `{range}`, expected lo:hi"))?;
    let lo: f64 = lo.trim().parse().map_err(|e| format!("bad range low: {e}"))?;
    let hi: f64 = hi.trim().parse().map_err(|e| format!("bad range high: {e}"))?;
    if !(hi > lo) {
        return Err("range high must exceed range low".into());
    }
    Ok((lo, hi))
}

fn parse_fix(fix: Option<&str>, n: usize) -> Result<Vec<(usize, f64)>, String> {
    let Some(fix) = fix else { return Ok(vec![]) };
    fix.split(',')
        .map(|pair| {
            let (i, v) = pair
                .split_once('=')
                .ok_or_else(|| format!("bad --fix entry `{pair}`, expected i=v"))?;
            let i: usize = i.trim().parse().map_err(|e| format!("bad fix index: {e}"))?;
            if i >= n {
                return Err(format!("fix index {i} out of range for n = {n}"));
            }
            let v: f64 = v.trim().parse().map_err(|e| format!("bad fix value: {e}"))?;
            Ok((i, v))
        })
        .collect()
}

fn cmd_slice(
    path: &std::path::Path,
    dims: &str,
    range: &str,
    steps: usize,
    fix: Option<&str>,
    out: Option<&std::path::Path>,
) -> Result<ExitCode, String> {
    let inst = load(path)?;
    let dims = parse_dims(dims, inst.n())?;
    let (lo, hi) = parse_range(range)?;
    if steps < 1 {
        return Err("--steps must be >= 1".into());
    }
    let mut base = DVector::zeros(inst.n());
    for (i, v) in parse_fix(fix, inst.n())? {
        base[i] = v;
    }

    let fmt = |v: f64| format!("{v:.16e}");
    let mut csv = String::new();
    let coord = |k: usize| lo + (hi - lo) * k as f64 / steps as f64;
    match dims.as_slice() {
        [d0] => {
            csv.push_str("x1,value\n");
            for k in 0..=steps {
                let mut x = base.clone();
                x[*d0] = coord(k);
                let v = inst.evaluate_objective(&x).map_err(|e| e.to_string())?;
                csv.push_str(&format!("{},{}\n", fmt(x[*d0]), fmt(v)));
            }
        }
        [d0, d1] => {
            csv.push_str("x1,x2,value\n");
            for k0 in 0..=steps {
                for k1 in 0..=steps {
                    let mut x = base.clone();
                    x[*d0] = coord(k0);
                    x[*d1] = coord(k1);
                    let v = inst.evaluate_objective(&x).map_err(|e| e.to_string())?;
                    csv.push_str(&format!("{},{},{}\n", fmt(x[*d0]), fmt(x[*d1]), fmt(v)));
                }
            }
        }
        _ => unreachable!("parse_dims enforces 1 or 2 dims"),
    }
    emit(out, &csv)?;
    Ok(ExitCode::SUCCESS)
}
