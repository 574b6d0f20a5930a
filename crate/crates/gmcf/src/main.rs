//! `gmcf <subcommand> --config <path> [--out <dir>]`
//!
//! Subcommands: evolve, expander, certify, converge, selftest.
//! GMCF_THREADS caps the worker count (0 or unset = all cores).

use std::path::PathBuf;
use std::process::ExitCode;

use gmcf::config::{parse_config, RunConfig};
use gmcf::initialdata::build_initial;
use gmcf::run;

const USAGE: &str = "usage: gmcf <evolve|expander|certify|converge|selftest> \
                     [--config <path>] [--out <dir>]";

struct Args {
    subcommand: String,
    config: Option<PathBuf>,
    out: PathBuf,
}

fn parse_args() -> Result<Args, String> {
    let mut argv = std::env::args().skip(1);
    let subcommand = argv.next().ok_or(USAGE.to_string())?;
    let mut config = None;
    let mut out = PathBuf::from("out");
    while let Some(flag) = argv.next() {
        match flag.as_str() {
            "--config" => {
                config = Some(PathBuf::from(
                    argv.next().ok_or("--config needs a path".to_string())?,
                ))
            }
            "--out" => out = PathBuf::from(argv.next().ok_or("--out needs a dir".to_string())?),
            other => return Err(format!("unknown flag {other:?}\n{USAGE}")),
        }
    }
    Ok(Args {
        subcommand,
        config,
        out,
    })
}

fn load_config(args: &Args) -> Result<RunConfig, String> {
    let text = match &args.config {
        None => String::new(),
        Some(path) => std::fs::read_to_string(path)
            .map_err(|e| format!("cannot read {}: {e}", path.display()))?,
    };
    parse_config(&text).map_err(|e| e.to_string())
}

fn threads_from_env() -> usize {
    std::env::var("GMCF_THREADS")
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or(0)
}

fn main() -> ExitCode {
    let args = match parse_args() {
        Ok(a) => a,
        Err(e) => {
            eprintln!("{e}");
            return ExitCode::from(2);
        }
    };
    let threads = threads_from_env();
    let result = match args.subcommand.as_str() {
        "evolve" => cmd_evolve(&args, threads),
        "expander" => cmd_expander(&args, threads),
        "certify" => cmd_certify(&args),
        "converge" => cmd_converge(&args, threads),
        "selftest" => cmd_selftest(threads),
        other => Err(format!("unknown subcommand {other:?}\n{USAGE}")),
    };
    match result {
        Ok(clean) => {
            if clean {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            }
        }
        Err(e) => {
            eprintln!("gmcf: {e}");
            ExitCode::from(2)
        }
    }
}

fn cmd_evolve(args: &Args, threads: usize) -> Result<bool, String> {
    let cfg = load_config(args)?;
    let outcome = run::evolve(&cfg, threads).map_err(|e| e.to_string())?;
    let csv = run::render_csv(&outcome.reports, None);
    run::write_artifacts(&cfg, &outcome.state, &csv, &args.out).map_err(|e| e.to_string())?;
    let failures = run::collect_failures(&outcome.reports);
    for line in &failures {
        println!("{line}");
    }
    println!(
        "evolve: {} reports to {}={:.6}, {} monitor failure(s); artifacts in {}",
        outcome.reports.len(),
        if cfg.mode == gmcf::flow::Mode::Raw { "t" } else { "s" },
        outcome.state.time,
        failures.len(),
        args.out.display()
    );
    Ok(failures.is_empty())
}

fn cmd_expander(args: &Args, threads: usize) -> Result<bool, String> {
    let cfg = load_config(args)?;
    let out = run::expander_run(&cfg, threads).map_err(|e| e.to_string())?;
    let csv = run::render_csv(&out.reports, Some(&out.residuals));
    run::write_artifacts(&cfg, &out.outcome.state, &csv, &args.out).map_err(|e| e.to_string())?;
    let mut failures = run::collect_failures(&out.reports);
    let last = out.outcome.series.last().unwrap();
    if !out.outcome.converged {
        failures.push(run::failure_json(
            "expander_convergence",
            last.s,
            last.residual_sup,
            1e-3,
            1e-3 - last.residual_sup,
        ));
    }
    if !out.outcome.endpoint_uniform {
        failures.push(run::failure_json(
            "expander_endpoint_p",
            last.s,
            out.outcome.endpoint_min_p,
            cfg.epsilon,
            out.outcome.endpoint_min_p - cfg.epsilon,
        ));
    }
    for line in &failures {
        println!("{line}");
    }
    println!(
        "expander: converged={} at s={:.6}, residual_sup={:.3e}, min p={:.6}{}",
        out.outcome.converged,
        last.s,
        last.residual_sup,
        out.outcome.endpoint_min_p,
        match out.outcome.decay_rate {
            Some(r) => format!(", decay rate {r:.3}"),
            None => String::new(),
        }
    );
    Ok(failures.is_empty())
}

fn cmd_certify(args: &Args) -> Result<bool, String> {
    let cfg = load_config(args)?;
    let grid = cfg.build_grid().map_err(|e| e.to_string())?;
    let spec = cfg.initial_spec();
    // certify never enforces epsilon; it reports the comparison instead
    let (_, cert) =
        build_initial(&spec, &grid, cfg.n, f64::NEG_INFINITY, cfg.delta).map_err(|e| e.to_string())?;
    let uniform = cert.min_p >= cfg.epsilon;
    println!("initial: {}", cfg.initial);
    println!("min p: {:.6}", cert.min_p);
    println!("max lambda: {:.6}", cert.max_lambda);
    println!("conical ratio (delta={}): {:.6}", cfg.delta, cert.conical_ratio);
    println!(
        "uniformly area decreasing at epsilon={}: {}",
        cfg.epsilon, uniform
    );
    Ok(true)
}

fn cmd_converge(args: &Args, threads: usize) -> Result<bool, String> {
    let cfg = load_config(args)?;
    let table = run::converge_study(&cfg, threads).map_err(|e| e.to_string())?;
    print!("{table}");
    Ok(true)
}

fn cmd_selftest(threads: usize) -> Result<bool, String> {
    let (report, ok) = run::selftest(threads);
    print!("{report}");
    println!("selftest: {}", if ok { "all checks passed" } else { "FAILURES" });
    Ok(ok)
}
