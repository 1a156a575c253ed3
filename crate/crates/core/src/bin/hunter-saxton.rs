use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use hunter_saxton::harness::{
    dx_for_k, run_eoc, run_measure_rates, run_projection_rates, run_solve, write_metadata, write_solution_csv,
    Example, ExperimentConfig, Metric, Pipeline,
};
use hunter_saxton::reference::IntegralMode;
use hunter_saxton::{HsError, Result};

#[derive(Parser)]
#[command(name = "hunter-saxton", version, about = "Alpha-dissipative Hunter-Saxton solver and convergence harness")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evolve the projected datum and write x,u,F tables at the given times.
    Solve(Common),
    /// Write the projected initial datum.
    Project(Common),
    /// Compute Err_k(T) and EOC_k(T) over the k ladder.
    Eoc(Common),
    /// W1 / bounded-Lipschitz rates at probe times (alpha = 0 only).
    MeasureRates(Common),
}

#[derive(Args, Clone)]
struct Common {
    /// JSON experiment config; command-line flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// appendixA, cosine, cusp or multipeakon.
    #[arg(long)]
    example: Option<String>,
    #[arg(long, default_value_t = -1.0, allow_hyphen_values = true)]
    cusp_a: f64,
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    cusp_b: f64,
    /// Multipeakon breakpoints as `x:u,x:u,...`.
    #[arg(long, allow_hyphen_values = true)]
    points: Option<String>,
    #[arg(long)]
    alpha: Option<f64>,
    /// Grid spacing for `solve` and `project` (default: dx of the smallest k).
    #[arg(long)]
    dx: Option<f64>,
    #[arg(long)]
    k_min: Option<u32>,
    #[arg(long)]
    k_max: Option<u32>,
    #[arg(long = "T")]
    t_end: Option<f64>,
    #[arg(long)]
    quad_tol: Option<f64>,
    #[arg(long)]
    inv_tol: Option<f64>,
    /// Reference breaking-set integrals: analytic or adaptive.
    #[arg(long, value_parser = ["analytic", "adaptive"])]
    integrals: Option<String>,
    #[arg(long)]
    time_samples: Option<usize>,
    /// Comma-separated output times for `solve` (default: T).
    #[arg(long, value_delimiter = ',')]
    times: Option<Vec<f64>>,
    /// Comma-separated probe times for `measure-rates` (default: T).
    #[arg(long, value_delimiter = ',')]
    probe_times: Option<Vec<f64>>,
}

fn parse_points(text: &str) -> Result<Vec<(f64, f64)>> {
    text.split(',')
        .map(|pair| {
            let (x, u) = pair
                .split_once(':')
                .ok_or_else(|| HsError::Config(format!("bad point '{pair}', expected x:u")))?;
            let parse = |s: &str| s.trim().parse::<f64>().map_err(|e| HsError::Config(format!("bad number '{s}': {e}")));
            Ok((parse(x)?, parse(u)?))
        })
        .collect()
}

impl Common {
    fn config(&self) -> Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(path) => ExperimentConfig::load(path)?,
            None => {
                let name = self
                    .example
                    .as_deref()
                    .ok_or_else(|| HsError::Config("either --config or --example is required".into()))?;
                let points = self.points.as_deref().map(parse_points).transpose()?;
                let example = Example::from_cli(name, (self.cusp_a, self.cusp_b), points)?;
                ExperimentConfig::new(example, 0.0, (1, 1), 1.0)
            }
        };
        if self.config.is_some() {
            if let Some(name) = &self.example {
                let points = self.points.as_deref().map(parse_points).transpose()?;
                cfg.example = Example::from_cli(name, (self.cusp_a, self.cusp_b), points)?;
            }
        }
        if let Some(a) = self.alpha {
            cfg.alpha = a;
        }
        if let Some(k) = self.k_min {
            cfg.k_range.0 = k;
            cfg.k_range.1 = cfg.k_range.1.max(k);
        }
        if let Some(k) = self.k_max {
            cfg.k_range.1 = k;
        }
        if let Some(t) = self.t_end {
            cfg.t_end = t;
        }
        if let Some(q) = self.quad_tol {
            cfg.tolerances.quad_tol = q;
        }
        if let Some(q) = self.inv_tol {
            cfg.tolerances.inv_tol = q;
        }
        match self.integrals.as_deref() {
            Some("adaptive") => cfg.tolerances.integrals = IntegralMode::Adaptive,
            Some(_) => cfg.tolerances.integrals = IntegralMode::Analytic,
            None => {}
        }
        if let Some(n) = self.time_samples {
            cfg.time_samples = n;
        }
        if let Some(p) = &self.probe_times {
            cfg.probe_times = p.clone();
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn out_dir(&self, cfg: &ExperimentConfig) -> Result<PathBuf> {
        let dir = if self.config.is_some() && self.out == Path::new("out") {
            cfg.outputs.dir.clone().unwrap_or_else(|| self.out.clone())
        } else {
            self.out.clone()
        };
        std::fs::create_dir_all(&dir)?;
        Ok(dir)
    }

    fn dx(&self, cfg: &ExperimentConfig) -> f64 {
        self.dx.unwrap_or_else(|| dx_for_k(cfg.k_range.0))
    }
}

fn solve(args: &Common) -> Result<()> {
    let cfg = args.config()?;
    let dir = args.out_dir(&cfg)?;
    let dx = args.dx(&cfg);
    let times = args.times.clone().unwrap_or_else(|| vec![cfg.t_end]);
    let out = run_solve(&cfg, dx, &times)?;
    let mut files = Vec::new();
    for ((t, sol), requested) in out.times.iter().zip(&out.solutions).zip(&out.requested) {
        if !requested {
            continue;
        }
        let name = format!("solution_t{t}_dx{dx}.csv");
        write_solution_csv(&dir.join(&name), sol)?;
        files.push(json!({"t": t, "file": name, "energy": sol.total_energy()}));
    }
    write_metadata(
        &dir.join("solve.json"),
        &json!({
            "example": cfg.example.id(),
            "alpha": cfg.alpha,
            "dx": dx,
            "outputs": files,
            "event_times": out.event_times,
        }),
    )?;
    println!("wrote {} solution tables to {}", files.len(), dir.display());
    Ok(())
}

fn project_cmd(args: &Common) -> Result<()> {
    let cfg = args.config()?;
    let dir = args.out_dir(&cfg)?;
    let dx = args.dx(&cfg);
    let pipe = Pipeline::new(&cfg, dx)?;
    let sol = pipe.solution(0.0)?;
    let name = format!("projection_dx{dx}.csv");
    write_solution_csv(&dir.join(&name), &sol)?;
    let err = hunter_saxton::projection_error(&pipe.datum, &pipe.projected)?;
    write_metadata(
        &dir.join("project.json"),
        &json!({
            "example": cfg.example.id(),
            "dx": dx,
            "window": pipe.projection.window,
            "energy": pipe.projected.total_energy(),
            "linf_u": err.linf_u,
            "l2_u": err.l2_u,
            "l2_ux": err.l2_ux,
            "l1_F": err.l1_f,
            "l2_F": err.l2_f,
            "file": name,
        }),
    )?;
    println!("wrote {}", dir.join(name).display());
    Ok(())
}

fn eoc(args: &Common) -> Result<()> {
    let cfg = args.config()?;
    let dir = args.out_dir(&cfg)?;
    let report = run_eoc(&cfg)?;
    report.write_csv(&dir.join("eoc.csv"))?;
    report.write_json(&dir.join("eoc.json"))?;
    for r in &report.rows {
        let eoc = r.eoc.map(|v| format!("{v:.2}")).unwrap_or_default();
        println!("k={} dx={:.3e} err={:.3e} eoc={}", r.k, r.dx, r.err, eoc);
    }
    if cfg.metrics.contains(&Metric::L2Ux) {
        let p = run_projection_rates(&cfg)?;
        p.write_csv(&dir.join("eoc_l2_ux.csv"))?;
        p.write_json(&dir.join("eoc_l2_ux.json"))?;
    }
    Ok(())
}

fn measure_rates(args: &Common) -> Result<()> {
    let cfg = args.config()?;
    let dir = args.out_dir(&cfg)?;
    for (i, report) in run_measure_rates(&cfg)?.iter().enumerate() {
        let stem = if i % 2 == 0 { "w1" } else { "dbl_upper" };
        let name = format!("{stem}_t{}", report.t_end);
        report.write_csv(&dir.join(format!("{name}.csv")))?;
        report.write_json(&dir.join(format!("{name}.json")))?;
        for r in &report.rows {
            let eoc = r.eoc.map(|v| format!("{v:.2}")).unwrap_or_default();
            println!("{} k={} dx={:.3e} err={:.3e} eoc={}", report.metric, r.k, r.dx, r.err, eoc);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Solve(a) => solve(a),
        Command::Project(a) => project_cmd(a),
        Command::Eoc(a) => eoc(a),
        Command::MeasureRates(a) => measure_rates(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
