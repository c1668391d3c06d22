//! `toruslab` — experiment runner for observability, control and decay
//! studies of dispersive equations on the torus.

mod config;
mod workflows;

use std::path::PathBuf;
use std::process::ExitCode;

use config::Config;
use workflows::{Overrides, RunError};

const HELP: &str = "\
toruslab — spectral laboratory for dispersive control on the torus

USAGE:
    toruslab <SUBCOMMAND> [--config PATH] [--out DIR] [--seed N] [--nmax N] [--dt X]

SUBCOMMANDS:
    certify         observability certificate for a space-time region
    control-linear  linear HUM control between zero-mean states
    control-kdv     nonlinear KdV control via the Picard fixed point
    decay           damped evolution and block decay-rate estimation
    verify          run the identity-verification battery

FLAGS:
    --config PATH   key = value configuration with [section] headers
    --out DIR       output directory for JSON/CSV reports (default: out)
    --seed N        override [experiment] seed
    --nmax N        override [experiment] nmax (Fourier truncation)
    --dt X          override the time step where applicable

EXIT CODES:
    0   success
    1   numerical failure (constant unavailable, Picard divergence, ...)
    2   configuration error (parse failure, invalid region, missing key)

CONFIG KEYS (by section):
    [experiment]  seed, nmax
    [symbol]      coefficients (ascending, monic; default 0 0 0 1 = k^3)
    [regions]     time_period, time, space      e.g. time = [0, 1) [1.5, 2)
    [control]     tol, data = random AMP | u0/u1 = sin k a, cos k a, mode k re im
    [kdv]         dt, picard_tol, cg_tol, max_iter, data/u0/u1
    [decay]       kind, amplitude, block_t, block_time, space, phases, blocks,
                  dt, data (= random | floquet | mode list)
Interval endpoints accept pi tokens: pi, 2pi, pi/2, 3pi/4, 0.5pi.
";

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().skip(1).collect();
    if args.is_empty() || args[0] == "--help" || args[0] == "-h" || args[0] == "help" {
        print!("{HELP}");
        return ExitCode::SUCCESS;
    }
    let subcommand = args[0].clone();

    let mut config_path: Option<PathBuf> = None;
    let mut out_dir = PathBuf::from("out");
    let mut overrides = Overrides { seed: None, nmax: None, dt: None };
    let mut i = 1;
    while i < args.len() {
        let flag = args[i].as_str();
        let value = |i: usize| -> Option<&String> { args.get(i + 1) };
        match flag {
            "--config" => {
                let Some(v) = value(i) else {
                    eprintln!("--config needs a path");
                    return ExitCode::from(2);
                };
                config_path = Some(PathBuf::from(v));
                i += 2;
            }
            "--out" => {
                let Some(v) = value(i) else {
                    eprintln!("--out needs a directory");
                    return ExitCode::from(2);
                };
                out_dir = PathBuf::from(v);
                i += 2;
            }
            "--seed" | "--nmax" | "--dt" => {
                let Some(v) = value(i) else {
                    eprintln!("{flag} needs a value");
                    return ExitCode::from(2);
                };
                match flag {
                    "--seed" => match v.parse() {
                        Ok(n) => overrides.seed = Some(n),
                        Err(e) => {
                            eprintln!("bad --seed '{v}': {e}");
                            return ExitCode::from(2);
                        }
                    },
                    "--nmax" => match v.parse() {
                        Ok(n) => overrides.nmax = Some(n),
                        Err(e) => {
                            eprintln!("bad --nmax '{v}': {e}");
                            return ExitCode::from(2);
                        }
                    },
                    _ => match v.parse() {
                        Ok(x) => overrides.dt = Some(x),
                        Err(e) => {
                            eprintln!("bad --dt '{v}': {e}");
                            return ExitCode::from(2);
                        }
                    },
                }
                i += 2;
            }
            other => {
                eprintln!("unknown flag '{other}' (see --help)");
                return ExitCode::from(2);
            }
        }
    }

    let cfg = match &config_path {
        Some(path) => match std::fs::read_to_string(path) {
            Ok(text) => match Config::parse(&text) {
                Ok(cfg) => cfg,
                Err(e) => {
                    eprintln!("{e}");
                    return ExitCode::from(2);
                }
            },
            Err(e) => {
                eprintln!("cannot read config {}: {e}", path.display());
                return ExitCode::from(2);
            }
        },
        None => Config::empty(),
    };

    let result = match subcommand.as_str() {
        "certify" => workflows::certify(&cfg, &overrides, &out_dir),
        "control-linear" => workflows::control_linear(&cfg, &overrides, &out_dir),
        "control-kdv" => workflows::control_kdv(&cfg, &overrides, &out_dir),
        "decay" => workflows::decay(&cfg, &overrides, &out_dir),
        "verify" => workflows::verify(&cfg, &overrides, &out_dir),
        other => {
            eprintln!("unknown subcommand '{other}' (see --help)");
            return ExitCode::from(2);
        }
    };

    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(RunError::Numerical(msg)) => {
            eprintln!("numerical failure: {msg}");
            ExitCode::from(1)
        }
        Err(RunError::Config(e)) => {
            eprintln!("{e}");
            ExitCode::from(2)
        }
    }
}
