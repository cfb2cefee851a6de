#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod config;

use clap::{Arg, ArgMatches, Command};
use config::{RunConfig, UsageError};
use serde_json::json;
use stable_ldp::exec::Exec;
use stable_ldp::ldp_harness::{
    fit_ldp_slope, gamma_for, moment_growth, moment_limit, moments_csv, quantile_thresholds, tail_csv, tail_from_samples, theory_slope,
    Campaign, CampaignPlan, Functional, Grid, TailKind,
};
use stable_ldp::path_space::{m1_distance, CadlagPath};
use stable_ldp::rate_functions::{rate_bridge, rate_excursion};
use stable_ldp::sampling::validation::{bridge_marginal_check, excursion_transition_check, KsCheck};
use stable_ldp::sampling::{batch_to_csv, RngStream, Sampler, SamplerConfig, SkeletonKind};
use stable_ldp::stable_math::{cdf, density, log_p1};
use stable_ldp::variational::{gamma_area, gamma_bridge_sup, gamma_numeric, gamma_sup, GridFunctional};
use stable_ldp::{make_params, Error, QuadratureSpec, StableParams};
use std::fmt::Write as _;
use std::path::Path;
use std::process::ExitCode;

enum Failure {
    Usage(String),
    Validation(String),
    Numerical(String),
}

impl From<UsageError> for Failure {
    fn from(e: UsageError) -> Self {
        Failure::Usage(e.0)
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Quadrature { .. } | Error::Coverage { .. } | Error::Numerical { .. } => Failure::Numerical(e.to_string()),
            _ => Failure::Usage(e.to_string()),
        }
    }
}

type Outcome = Result<(), Failure>;

/// (flag, help) pairs; every flag takes one value.
type Flags = &'static [(&'static str, &'static str)];

const COMMANDS: &[(&str, &str, Flags)] = &[
    (
        "density",
        "Tabulate p_t with its cdf and tail asymptotics",
        &[
            ("alpha", "stable index in (1, 2)"),
            ("t", "time (default 1)"),
            ("xmin", "left end of the range"),
            ("xmax", "right end of the range"),
            ("points", "number of grid points (default 2048)"),
            ("out", "output directory (default .)"),
        ],
    ),
    (
        "sample",
        "Draw free paths, bridges or excursions on a dyadic grid",
        &[
            ("kind", "free | bridge | excursion"),
            ("alpha", "stable index in (1, 2)"),
            ("n", "grid size, a power of two (default 1024)"),
            ("N", "number of paths (default 1000)"),
            ("seed", "random seed (required)"),
            ("a", "bridge endpoint (default 0)"),
            ("out", "output directory (default .)"),
        ],
    ),
    (
        "rate",
        "Evaluate the excursion or bridge rate function of a path file",
        &[
            ("path", "path CSV (t,left,right with an interpolation line)"),
            ("alpha", "stable index in (1, 2)"),
            ("kind", "excursion | bridge (default excursion)"),
            ("a", "bridge endpoint (default 0)"),
            ("out", "output directory (default .)"),
        ],
    ),
    (
        "dist",
        "M1' distance between two path files",
        &[
            ("a", "first path CSV"),
            ("b", "second path CSV"),
            ("tol", "bisection tolerance (default 1e-6)"),
            ("out", "output directory (default .)"),
        ],
    ),
    (
        "gamma",
        "Solve the variational problem for a functional numerically",
        &[
            ("functional", "area | sup"),
            ("alpha", "stable index in (1, 2)"),
            ("n", "grid size (default 1024)"),
            ("out", "output directory (default .)"),
        ],
    ),
    (
        "tails",
        "Monte Carlo tail, slope and moment tables for a functional",
        &[
            ("functional", "area | sup"),
            ("kind", "excursion | bridge-sup (default excursion)"),
            ("alpha", "stable index in (1, 2)"),
            ("n", "coarse grid size (default 1024)"),
            ("N", "number of samples (default 100000)"),
            ("seed", "random seed (required)"),
            (
                "levels",
                "survival levels for thresholds, ';' separated (default 1e-2;3e-3;1e-3;3e-4;1e-4)",
            ),
            ("kmax", "largest moment order (default 12)"),
            ("out", "output directory (default .)"),
        ],
    ),
    (
        "validate",
        "KS validation of bridge marginals and the excursion transition",
        &[
            ("alpha", "stable index in (1, 2)"),
            ("N", "bridge samples per configuration (default 20000)"),
            ("hits", "conditioned excursion samples (default 20000)"),
            ("n", "excursion grid size (default 512)"),
            ("seed", "random seed (required)"),
            ("out", "output directory (default .)"),
        ],
    ),
];

fn cli() -> Command {
    let mut app = Command::new("stable-ldp")
        .version(env!("CARGO_PKG_VERSION"))
        .about("Large deviations of stable excursions and bridges: densities, sampling, rates, metrics and tail checks")
        .subcommand_required(true)
        .arg_required_else_help(true);
    for (name, about, flags) in COMMANDS {
        let mut sub = Command::new(*name).about(*about).arg(
            Arg::new("config")
                .long("config")
                .value_name("FILE")
                .help("flat key=value file; flags override it"),
        );
        for (flag, help) in *flags {
            sub = sub.arg(Arg::new(*flag).long(*flag).allow_hyphen_values(true).help(*help));
        }
        app = app.subcommand(sub);
    }
    app
}

/// Config file values overlaid with the flags given on the command line.
fn effective_config(name: &str, m: &ArgMatches) -> Result<RunConfig, Failure> {
    let mut cfg = match m.get_one::<String>("config") {
        Some(p) => RunConfig::read(Path::new(p))?,
        None => RunConfig::default(),
    };
    let flags = COMMANDS.iter().find(|c| c.0 == name).map(|c| c.2).unwrap_or(&[]);
    let keys: Vec<&str> = flags.iter().map(|f| f.0).collect();
    for key in &keys {
        if let Some(v) = m.get_one::<String>(key) {
            cfg.set(key, v.clone());
        }
    }
    let unknown = cfg.restrict(&keys);
    if !unknown.is_empty() {
        eprintln!("stable-ldp {name}: ignoring config keys {}", unknown.join(", "));
    }
    Ok(cfg)
}

fn params(cfg: &RunConfig) -> Result<StableParams, Failure> {
    Ok(make_params(cfg.require("alpha")?)?)
}

fn write(dir: &Path, file: &str, contents: &str) -> Outcome {
    std::fs::write(dir.join(file), contents).map_err(|e| Failure::Usage(format!("cannot write {file}: {e}")))
}

/// Writes `{command}.json`: the effective config plus command results.
fn report(dir: &Path, command: &str, cfg: &RunConfig, results: serde_json::Value) -> Outcome {
    let doc = json!({
        "tool": "stable-ldp",
        "version": env!("CARGO_PKG_VERSION"),
        "command": command,
        "config": cfg.to_json(),
        "results": results,
    });
    let text = serde_json::to_string_pretty(&doc).map_err(|e| Failure::Numerical(e.to_string()))?;
    write(dir, &format!("{command}.json"), &(text + "\n"))
}

fn cmd_density(mut cfg: RunConfig) -> Outcome {
    let p = params(&cfg)?;
    let t: f64 = cfg.or("t", 1.0)?;
    let xmin: f64 = cfg.require("xmin")?;
    let xmax: f64 = cfg.require("xmax")?;
    let points: usize = cfg.or("points", 2048)?;
    if !(xmax > xmin) || points < 2 || !(t > 0.0) {
        return Err(Failure::Usage("density: need t > 0, xmin < xmax and points >= 2".into()));
    }
    let dir = cfg.out_dir()?;
    let q = QuadratureSpec::default();
    let header = cfg.header("density");
    let (mut csv, mut side) = (header.clone(), header);
    csv.push_str("x,pdf,cdf\n");
    side.push_str("x,x_pow_alpha_plus_1_pdf,neg_log_pdf_neg_x_over_x_pow_alpha_prime\n");
    let step = (xmax - xmin) / (points - 1) as f64;
    let mut mass = 0.0;
    let mut prev: Option<(f64, f64)> = None;
    for i in 0..points {
        let x = if i == points - 1 { xmax } else { xmin + step * i as f64 };
        let f = density(&p, t, x, &q)?;
        let _ = writeln!(csv, "{x:?},{f:?},{:?}", cdf(&p, t, x, &q)?);
        if let Some((x0, f0)) = prev {
            mass += 0.5 * (f + f0) * (x - x0);
        }
        prev = Some((x, f));
        // the sidecar is about p_1, whatever t is
        let right = if x > 0.0 {
            x.powf(p.alpha() + 1.0) * density(&p, 1.0, x, &q)?
        } else {
            f64::NAN
        };
        let left = if x > 0.0 {
            -log_p1(&p, -x, &q)? / x.powf(p.alpha_prime())
        } else {
            f64::NAN
        };
        let _ = writeln!(side, "{x:?},{right:?},{left:?}");
    }
    write(&dir, "density.csv", &csv)?;
    write(&dir, "density_asymptotics.csv", &side)?;
    report(
        &dir,
        "density",
        &cfg,
        json!({
            "rows": points,
            "trapezoid_mass_in_range": mass,
            "c_alpha": p.c_alpha(),
            "big_c_alpha": p.big_c_alpha(),
            "right_tail_limit": p.alpha() * p.big_c_alpha(),
        }),
    )?;
    println!("density: {points} rows, mass in range {mass:.8}");
    Ok(())
}

fn cmd_sample(mut cfg: RunConfig) -> Outcome {
    let seed: u64 = cfg.require("seed")?;
    let kind = match cfg.require::<String>("kind")?.as_str() {
        "bridge" => SkeletonKind::Bridge(cfg.or("a", 0.0)?),
        other => SkeletonKind::parse(other)?,
    };
    let p = params(&cfg)?;
    let n: usize = cfg.or("n", 1024)?;
    let count: usize = cfg.or("N", 1000)?;
    let dir = cfg.out_dir()?;
    let sampler = Sampler::new(&p, SamplerConfig::with_n(n))?;
    let paths = Exec::available()
        .map(count, |i| {
            let mut rng = RngStream::with_stream(seed, i as u64);
            match kind {
                SkeletonKind::Free => Ok(sampler.sample_free_path(&mut rng)),
                SkeletonKind::Bridge(a) => sampler.sample_bridge(a, &mut rng),
                SkeletonKind::Excursion => Ok(sampler.sample_excursion(&mut rng)),
            }
        })
        .into_iter()
        .collect::<Result<Vec<_>, _>>()?;
    write(&dir, "samples.csv", &(cfg.header("sample") + &batch_to_csv(&paths)))?;
    let ends: Vec<f64> = paths.iter().map(|s| s.values[n]).collect();
    report(
        &dir,
        "sample",
        &cfg,
        json!({
            "paths": paths.len(),
            "values_per_path": n + 1,
            "kind": kind.label(),
            "mean_endpoint": ends.iter().sum::<f64>() / ends.len().max(1) as f64,
        }),
    )?;
    println!("sample: {} {} paths of {} values", paths.len(), kind.label(), n + 1);
    Ok(())
}

fn read_path(cfg: &RunConfig, key: &str) -> Result<CadlagPath, Failure> {
    let file: String = cfg.require(key)?;
    CadlagPath::read_csv(Path::new(&file)).map_err(|e| Failure::Usage(format!("{file}: {e}")))
}

fn cmd_rate(mut cfg: RunConfig) -> Outcome {
    let p = params(&cfg)?;
    let path = read_path(&cfg, "path")?;
    let kind: String = cfg.or("kind", "excursion".to_string())?;
    let r = match kind.as_str() {
        "excursion" => rate_excursion(&p, &path),
        "bridge" => rate_bridge(&p, &path, cfg.or("a", 0.0)?),
        other => return Err(Failure::Usage(format!("rate: unknown kind '{other}' (excursion|bridge)"))),
    };
    let dir = cfg.out_dir()?;
    report(&dir, "rate", &cfg, json!({ "value": r.value, "reason": r.reason }))?;
    if r.is_finite() {
        println!("{:?}", r.value);
    } else {
        println!("inf ({})", r.reason.as_str());
    }
    Ok(())
}

fn cmd_dist(mut cfg: RunConfig) -> Outcome {
    let a = read_path(&cfg, "a")?;
    let b = read_path(&cfg, "b")?;
    let tol: f64 = cfg.or("tol", 1e-6)?;
    let d = m1_distance(&a, &b, tol)?;
    let dir = cfg.out_dir()?;
    report(&dir, "dist", &cfg, json!({ "distance": d }))?;
    println!("{d:?}");
    Ok(())
}

fn cmd_gamma(mut cfg: RunConfig) -> Outcome {
    let p = params(&cfg)?;
    let name: String = cfg.require("functional")?;
    let (phi, analytic) = match name.as_str() {
        "area" => (GridFunctional::area(), gamma_area(&p)),
        "sup" => (GridFunctional::sup(), gamma_sup(&p)),
        other => return Err(Error::UnsupportedFunctional(other.to_string()).into()),
    };
    let n: usize = cfg.or("n", 1024)?;
    let dir = cfg.out_dir()?;
    let r = gamma_numeric(&p, &phi, n)?;
    let gap = r.gamma - analytic;
    let mut csv = cfg.header("gamma");
    csv.push_str("t,maximizer\n");
    for (i, v) in r.maximizer.iter().enumerate() {
        let _ = writeln!(csv, "{:?},{v:?}", i as f64 / n as f64);
    }
    write(&dir, "gamma_maximizer.csv", &csv)?;
    report(
        &dir,
        "gamma",
        &cfg,
        json!({
            "numeric": r.gamma,
            "analytic": analytic,
            "gap": gap,
            "iterations": r.iterations,
            "constraint_residual": r.constraint_residual,
            "bridge_sup_analytic": gamma_bridge_sup(&p),
        }),
    )?;
    println!("numeric {:.10} analytic {analytic:.10} gap {gap:.3e}", r.gamma);
    Ok(())
}

fn cmd_tails(mut cfg: RunConfig) -> Outcome {
    let seed: u64 = cfg.require("seed")?;
    let p = params(&cfg)?;
    let functional = Functional::parse(&cfg.require::<String>("functional")?)?;
    let kind = TailKind::parse(&cfg.or("kind", "excursion".to_string())?)?;
    let n: usize = cfg.or("n", 1024)?;
    let samples: usize = cfg.or("N", 100_000)?;
    let levels_raw: String = cfg.or("levels", "1e-2;3e-3;1e-3;3e-4;1e-4".to_string())?;
    let levels = levels_raw
        .split(';')
        .map(|s| s.trim().parse::<f64>().map_err(|e| Failure::Usage(format!("levels: '{s}' ({e})"))))
        .collect::<Result<Vec<_>, _>>()?;
    if levels.iter().any(|&l| !(l > 0.0 && l < 1.0)) {
        return Err(Failure::Usage("levels must lie in (0, 1)".into()));
    }
    let kmax: u32 = cfg.or("kmax", 12)?;
    let theory = theory_slope(&p, functional, kind)?;
    let dir = cfg.out_dir()?;
    let sampler = Sampler::new(&p, SamplerConfig::with_n(n))?;
    let campaign = Campaign::run(&sampler, CampaignPlan::new(n, samples, seed), Exec::available())?;
    let coarse = campaign.functional(functional, kind, Grid::Coarse)?;
    let fine = campaign.functional(functional, kind, Grid::Fine)?;
    let thresholds = quantile_thresholds(&coarse, &levels);
    let est = tail_from_samples(&coarse, &thresholds)?;
    let fit = fit_ldp_slope(&p, &est, theory)?;
    let fit_fine = fit_ldp_slope(&p, &tail_from_samples(&fine, &thresholds)?, theory)?;
    let header = cfg.header("tails");
    write(&dir, "tails.csv", &(header.clone() + &tail_csv(&est)))?;
    let limit = moment_limit(&p, functional, kind)?;
    let moments = moment_growth(&p, &coarse, kmax)?;
    write(&dir, "moments.csv", &(header + &moments_csv(&moments, limit)))?;
    let guard = (fit_fine.slope - fit.slope).abs() < 3.0 * fit.slope_se;
    report(
        &dir,
        "tails",
        &cfg,
        json!({
            "gamma": gamma_for(&p, functional, kind)?,
            "fit": fit,
            "fit_fine_grid": fit_fine,
            "two_grid_guard": guard,
            "moment_limit": limit,
            "moments": moments,
        }),
    )?;
    println!(
        "slope {:.5} ± {:.5} theory {theory:.5} deviation {:.3} two-grid guard {}",
        fit.slope,
        fit.slope_se,
        fit.relative_deviation,
        if guard { "ok" } else { "failed" }
    );
    Ok(())
}

fn cmd_validate(mut cfg: RunConfig) -> Outcome {
    let seed: u64 = cfg.require("seed")?;
    let p = params(&cfg)?;
    let samples: usize = cfg.or("N", 20_000)?;
    let hits: usize = cfg.or("hits", 20_000)?;
    let n: usize = cfg.or("n", 512)?;
    let dir = cfg.out_dir()?;
    let exec = Exec::available();
    let sampler = Sampler::new(&p, SamplerConfig::with_n(n))?;
    let mut checks: Vec<KsCheck> = Vec::new();
    for (i, (a, t)) in [(0.0, 0.25), (0.0, 0.5), (-1.0, 0.25), (-1.0, 0.5), (1.0, 0.25), (1.0, 0.5)]
        .into_iter()
        .enumerate()
    {
        checks.push(bridge_marginal_check(&sampler, a, t, samples, seed.wrapping_add(i as u64), exec)?);
    }
    checks.push(excursion_transition_check(&sampler, hits, seed.wrapping_add(100), exec)?);
    let mut csv = cfg.header("validate");
    csv.push_str("name,statistic,samples,threshold,pass\n");
    for c in &checks {
        let _ = writeln!(csv, "{},{:?},{},{:?},{}", c.name, c.statistic, c.samples, c.threshold, c.pass);
        println!(
            "{} {}: KS {:.4} (threshold {})",
            if c.pass { "PASS" } else { "FAIL" },
            c.name,
            c.statistic,
            c.threshold
        );
    }
    write(&dir, "validate.csv", &csv)?;
    let pass = checks.iter().all(|c| c.pass);
    report(&dir, "validate", &cfg, json!({ "pass": pass, "checks": checks }))?;
    if pass {
        Ok(())
    } else {
        Err(Failure::Validation("validate: at least one KS check failed".into()))
    }
}

fn main() -> ExitCode {
    let matches = match cli().try_get_matches() {
        Ok(m) => m,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let (name, sub) = matches.subcommand().expect("subcommand is required");
    let run = || -> Outcome {
        let cfg = effective_config(name, sub)?;
        match name {
            "density" => cmd_density(cfg),
            "sample" => cmd_sample(cfg),
            "rate" => cmd_rate(cfg),
            "dist" => cmd_dist(cfg),
            "gamma" => cmd_gamma(cfg),
            "tails" => cmd_tails(cfg),
            "validate" => cmd_validate(cfg),
            _ => unreachable!("clap rejects unknown subcommands"),
        }
    };
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Validation(m)) => {
            eprintln!("stable-ldp: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(m)) => {
            eprintln!("stable-ldp: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Numerical(m)) => {
            eprintln!("stable-ldp: {m}");
            ExitCode::from(3)
        }
    }
}
