//! The five experiment workflows behind the CLI subcommands.

use std::f64::consts::PI;
use std::path::Path;

use toruslab::damping::{
    block_propagator, decay_rate, dominant_floquet_mode, solve_damped, DampingField,
    SpatialProfile,
};
use toruslab::hum::HumSystem;
use toruslab::kdv::picard_control;
use toruslab::observability::band_certificate;
use toruslab::region::{IntervalUnion, SpaceTimeRegion};
use toruslab::report::{
    control_csv, decay_csv, eigenvalue_csv, to_json_pretty, trajectory_csv, ControlReportJson,
    DecayReportJson, Document, GramReportJson, PicardReportJson, Provenance,
};
use toruslab::rng::SeededRng;
use toruslab::spectral::{DispersionSymbol, FourierState};

use crate::config::{parse_state, Config, ConfigError};

const TWO_PI: f64 = 2.0 * PI;

pub enum RunError {
    /// Exit code 2.
    Config(ConfigError),
    /// Exit code 1.
    Numerical(String),
}

impl From<ConfigError> for RunError {
    fn from(e: ConfigError) -> Self {
        RunError::Config(e)
    }
}

impl From<toruslab::error::Error> for RunError {
    fn from(e: toruslab::error::Error) -> Self {
        RunError::Numerical(e.to_string())
    }
}

pub struct Overrides {
    pub seed: Option<u64>,
    pub nmax: Option<usize>,
    pub dt: Option<f64>,
}

fn write(out_dir: &Path, name: &str, content: &str) -> Result<(), RunError> {
    std::fs::create_dir_all(out_dir)
        .map_err(|e| RunError::Numerical(format!("cannot create {}: {e}", out_dir.display())))?;
    let path = out_dir.join(name);
    std::fs::write(&path, content)
        .map_err(|e| RunError::Numerical(format!("cannot write {}: {e}", path.display())))?;
    println!("wrote {}", path.display());
    Ok(())
}

fn symbol_from(cfg: &Config) -> Result<DispersionSymbol, RunError> {
    match cfg.get_i64_list("symbol", "coefficients")? {
        Some(coeffs) => {
            if coeffs.len() < 3 || *coeffs.last().unwrap() != 1 {
                return Err(ConfigError {
                    line: cfg.line_of("symbol", "coefficients"),
                    field: "[symbol] coefficients".into(),
                    message: "need a monic polynomial of degree >= 2 (ascending coefficients)"
                        .into(),
                }
                .into());
            }
            Ok(DispersionSymbol::new(coeffs))
        }
        None => Ok(DispersionSymbol::kdv()),
    }
}

fn seed_of(cfg: &Config, ov: &Overrides) -> Result<u64, RunError> {
    Ok(ov.seed.or(cfg.get_u64("experiment", "seed")?).unwrap_or(0))
}

fn positive(
    cfg: &Config,
    section: &str,
    key: &str,
    value: f64,
) -> Result<f64, RunError> {
    if value <= 0.0 {
        return Err(ConfigError {
            line: cfg.line_of(section, key),
            field: format!("[{section}] {key}"),
            message: format!("must be positive, got {value}"),
        }
        .into());
    }
    Ok(value)
}

fn nmax_of(cfg: &Config, ov: &Overrides, default: usize) -> Result<usize, RunError> {
    let n = ov.nmax.or(cfg.get_usize("experiment", "nmax")?).unwrap_or(default);
    if n < 4 {
        return Err(ConfigError {
            line: cfg.line_of("experiment", "nmax"),
            field: "[experiment] nmax".into(),
            message: format!("nmax must be at least 4, got {n}"),
        }
        .into());
    }
    Ok(n)
}

fn control_regions(cfg: &Config) -> Result<(IntervalUnion, IntervalUnion, f64), RunError> {
    let t_period = cfg.get_f64("regions", "time_period")?.unwrap_or(TWO_PI);
    let time = cfg
        .get_intervals("regions", "time", t_period)?
        .ok_or_else(|| ConfigError {
            line: 0,
            field: "[regions] time".into(),
            message: "required key missing".into(),
        })?;
    let space = cfg
        .get_intervals("regions", "space", TWO_PI)?
        .ok_or_else(|| ConfigError {
            line: 0,
            field: "[regions] space".into(),
            message: "required key missing".into(),
        })?;
    Ok((time, space, t_period))
}

fn data_pair(
    cfg: &Config,
    section: &str,
    n_max: usize,
    rng: &mut SeededRng,
) -> Result<(FourierState, FourierState), RunError> {
    if let Some(spec) = cfg.get_str(section, "data") {
        let toks: Vec<&str> = spec.split_whitespace().collect();
        if toks.first() == Some(&"random") {
            let amp = if toks.len() > 1 {
                toruslab::region::parse_scalar(toks[1]).map_err(|m| ConfigError {
                    line: cfg.line_of(section, "data"),
                    field: format!("[{section}] data"),
                    message: m,
                })?
            } else {
                0.01
            };
            let mut draw = || {
                let mut s = FourierState::zeros(n_max);
                for k in -(n_max as i64)..=(n_max as i64) {
                    if k != 0 {
                        s.set_coeff(k, rng.complex_gaussian() * amp);
                    }
                }
                s
            };
            return Ok((draw(), draw()));
        }
        return Err(ConfigError {
            line: cfg.line_of(section, "data"),
            field: format!("[{section}] data"),
            message: format!("unknown data spec '{spec}' (use 'random AMP' or u0=/u1= lists)"),
        }
        .into());
    }
    let u0_text = cfg.require_str(section, "u0")?;
    let u1_text = cfg.require_str(section, "u1")?;
    let u0 = parse_state(u0_text, n_max, cfg.line_of(section, "u0"), "u0")?;
    let u1 = parse_state(u1_text, n_max, cfg.line_of(section, "u1"), "u1")?;
    Ok((u0, u1))
}

pub fn certify(cfg: &Config, ov: &Overrides, out_dir: &Path) -> Result<(), RunError> {
    let seed = seed_of(cfg, ov)?;
    let n_max = nmax_of(cfg, ov, 32)?;
    let p = symbol_from(cfg)?;
    let (time, space, t_period) = control_regions(cfg)?;
    let g = SpaceTimeRegion::product(&time, &space);
    let report = band_certificate(&g, &p, n_max as i64)?;
    if report.observability_constant.is_none() {
        return Err(RunError::Numerical(format!(
            "observability constant unavailable: lambda_min = {:.3e}",
            report.lambda_min
        )));
    }
    let body = GramReportJson::new(
        &report,
        format!("{{(k, p(k)) : {} < |k| <= {}}}", report.n_threshold.unwrap_or(0), n_max),
        format!("time {:?} x space {:?} on [0,{t_period}) x [0,2pi)", time.intervals(), space.intervals()),
    );
    let doc = Document {
        provenance: Provenance::new("certify", &cfg.text, seed, n_max),
        report: body,
    };
    write(out_dir, "certify.json", &to_json_pretty(&doc))?;
    write(out_dir, "eigenvalues.csv", &eigenvalue_csv(&report))?;
    println!(
        "certify: N = {}, lambda_min = {:.6e}, constant = {:.6e}",
        report.n_threshold.unwrap_or(0),
        report.lambda_min,
        report.observability_constant.unwrap()
    );
    Ok(())
}

pub fn control_linear(cfg: &Config, ov: &Overrides, out_dir: &Path) -> Result<(), RunError> {
    let seed = seed_of(cfg, ov)?;
    let n_max = nmax_of(cfg, ov, 16)?;
    let p = symbol_from(cfg)?;
    let (e_t, f, _) = control_regions(cfg)?;
    let tol = positive(cfg, "control", "tol", cfg.get_f64("control", "tol")?.unwrap_or(1e-10))?;
    let mut rng = SeededRng::new(seed);
    let (v0, v1) = data_pair(cfg, "control", n_max, &mut rng)?;
    let sys = HumSystem::new(e_t, f, p, n_max, 0.0)?;
    let sol = sys.synthesize_control(&v0, &v1, tol)?;
    let body = ControlReportJson::new(&sys, &sol);
    let doc = Document {
        provenance: Provenance::new("control-linear", &cfg.text, seed, n_max),
        report: body,
    };
    write(out_dir, "control_linear.json", &to_json_pretty(&doc))?;
    let nt = cfg.get_usize("control", "csv_time_samples")?.unwrap_or(64);
    let nx = cfg.get_usize("control", "csv_space_samples")?.unwrap_or(64).max(2 * n_max + 1);
    write(out_dir, "control.csv", &control_csv(&sys, &sol.psi, nt, nx))?;
    println!(
        "control-linear: endpoint residual {:.3e}, cost {:.6e}, cg iterations {}",
        sol.endpoint_residual, sol.cost, sol.cg_iterations
    );
    Ok(())
}

pub fn control_kdv(cfg: &Config, ov: &Overrides, out_dir: &Path) -> Result<(), RunError> {
    let seed = seed_of(cfg, ov)?;
    let n_max = nmax_of(cfg, ov, 32)?;
    let p = symbol_from(cfg)?;
    let (e_t, f, _) = control_regions(cfg)?;
    let dt = positive(cfg, "kdv", "dt", ov.dt.or(cfg.get_f64("kdv", "dt")?).unwrap_or(1e-3))?;
    let tol = positive(cfg, "kdv", "picard_tol", cfg.get_f64("kdv", "picard_tol")?.unwrap_or(1e-6))?;
    let cg_tol = positive(cfg, "kdv", "cg_tol", cfg.get_f64("kdv", "cg_tol")?.unwrap_or(1e-10))?;
    let max_iter = cfg.get_usize("kdv", "max_iter")?.unwrap_or(12);
    let mut rng = SeededRng::new(seed);
    let (u0, u1) = data_pair(cfg, "kdv", n_max, &mut rng)?;
    let mean = u0.mean().re;
    let sys = HumSystem::new(e_t, f, p, n_max, mean)?;
    let run = picard_control(&u0, &u1, &sys, dt, max_iter, tol, cg_tol)?;
    let body = PicardReportJson::new(&run);
    let doc = Document {
        provenance: Provenance::new("control-kdv", &cfg.text, seed, n_max),
        report: body,
    };
    write(out_dir, "control_kdv.json", &to_json_pretty(&doc))?;
    if let Some(traj) = &run.final_trajectory {
        write(out_dir, "trajectory.csv", &trajectory_csv(traj))?;
    }
    if let Some(psi) = &run.final_psi {
        let nt = cfg.get_usize("kdv", "csv_time_samples")?.unwrap_or(64);
        let nx = cfg.get_usize("kdv", "csv_space_samples")?.unwrap_or(64).max(2 * n_max + 1);
        write(out_dir, "control.csv", &control_csv(&sys, psi, nt, nx))?;
    }
    let last = run.iterates.last().map(|i| i.endpoint_error).unwrap_or(0.0);
    println!(
        "control-kdv: converged = {}, iterations = {}, endpoint error {:.3e}",
        run.converged,
        run.iterates.len(),
        last
    );
    if !run.converged {
        return Err(RunError::Numerical(format!(
            "Picard did not converge (diverged = {}, data norm {:.3e})",
            run.diverged, run.data_norm
        )));
    }
    Ok(())
}

fn damping_field(cfg: &Config, rng: &mut SeededRng) -> Result<DampingField, RunError> {
    let kind = cfg.get_str("decay", "kind").unwrap_or("uniform");
    let amplitude = cfg.get_f64("decay", "amplitude")?.unwrap_or(1.0);
    let block_t = cfg.get_f64("decay", "block_t")?.unwrap_or(1.0);
    let space = cfg
        .get_intervals("decay", "space", TWO_PI)?
        .unwrap_or_else(IntervalUnion::full_torus);
    let phases = match cfg.get_str("decay", "phases") {
        Some("random") => {
            let n = cfg.get_usize("decay", "blocks")?.unwrap_or(10);
            (0..n).map(|_| rng.range(0.0, TWO_PI)).collect()
        }
        Some(_) => cfg.get_f64_list("decay", "phases")?.unwrap_or_else(|| vec![0.0]),
        None => vec![0.0],
    };
    let field = match kind {
        "uniform" | "time_independent" => DampingField::TimeIndependent {
            profile: SpatialProfile::Indicator { region: space, amplitude },
        },
        "periodic_blocks" | "block_indicator" => {
            let block_time = cfg
                .get_intervals("decay", "block_time", block_t)?
                .unwrap_or_else(|| IntervalUnion::full(block_t));
            let block = SpaceTimeRegion::product(&block_time, &space);
            if kind == "periodic_blocks" {
                DampingField::PeriodicBlocks { block, amplitude }
            } else {
                DampingField::BlockIndicator { base: block, phases, amplitude }
            }
        }
        "modulated_wave" => DampingField::ModulatedWave {
            block_t,
            phases,
            profile: SpatialProfile::Indicator { region: space, amplitude: 1.0 },
            amplitude,
        },
        other => {
            return Err(ConfigError {
                line: cfg.line_of("decay", "kind"),
                field: "[decay] kind".into(),
                message: format!(
                    "unknown kind '{other}' (uniform | periodic_blocks | modulated_wave | block_indicator)"
                ),
            }
            .into())
        }
    };
    field.validate()?;
    Ok(field)
}

pub fn decay(cfg: &Config, ov: &Overrides, out_dir: &Path) -> Result<(), RunError> {
    let seed = seed_of(cfg, ov)?;
    let n_max = nmax_of(cfg, ov, 16)?;
    let p = symbol_from(cfg)?;
    let dt = positive(cfg, "decay", "dt", ov.dt.or(cfg.get_f64("decay", "dt")?).unwrap_or(1e-3))?;
    let blocks = cfg.get_usize("decay", "blocks")?.unwrap_or(10);
    let mut rng = SeededRng::new(seed);
    let field = damping_field(cfg, &mut rng)?;
    let block_t = field.block_t();

    let u0 = match cfg.get_str("decay", "data") {
        None | Some("random") => {
            let mut s = FourierState::zeros(n_max);
            for k in -(n_max as i64)..=(n_max as i64) {
                s.set_coeff(k, rng.complex_gaussian());
            }
            s
        }
        Some("floquet") => {
            let m = block_propagator(&field, &p, n_max, dt)?;
            let (lambda, mode) = dominant_floquet_mode(&m);
            println!("decay: dominant Floquet multiplier |lambda| = {:.6e}", lambda.norm());
            mode
        }
        Some(text) => parse_state(text, n_max, cfg.line_of("decay", "data"), "data")?,
    };

    let traj = solve_damped(&u0, &field, &p, blocks as f64 * block_t, dt)?;
    let rep = decay_rate(&traj, &field, block_t)?;
    let body = DecayReportJson::new(&rep);
    let doc = Document {
        provenance: Provenance::new("decay", &cfg.text, seed, n_max),
        report: body,
    };
    write(out_dir, "decay.json", &to_json_pretty(&doc))?;
    write(out_dir, "decay.csv", &decay_csv(&rep, block_t))?;
    println!(
        "decay: gamma = {:.6e} over {} blocks, max alpha = {:.6e}",
        rep.gamma_fit,
        rep.blocks_used,
        rep.alphas.iter().cloned().fold(0.0, f64::max)
    );
    if !rep.anomalies.is_empty() {
        return Err(RunError::Numerical(format!(
            "norm increased in blocks {:?} despite a >= 0",
            rep.anomalies
        )));
    }
    Ok(())
}

pub fn verify(cfg: &Config, ov: &Overrides, out_dir: &Path) -> Result<(), RunError> {
    let seed = seed_of(cfg, ov)?;
    let n_max = nmax_of(cfg, ov, 12)?;
    let report = toruslab::verify::run_verify(seed, n_max);
    let doc = Document {
        provenance: Provenance::new("verify", &cfg.text, seed, n_max),
        report: &report,
    };
    write(out_dir, "verify.json", &to_json_pretty(&doc))?;
    for c in &report.checks {
        println!(
            "{} {:<34} value {:>12.3e}  bound {:>12.3e}",
            if c.passed { "pass" } else { "FAIL" },
            c.name,
            c.value,
            c.bound
        );
    }
    if !report.all_passed {
        return Err(RunError::Numerical("verification checks failed".into()));
    }
    println!("verify: all {} checks passed", report.checks.len());
    Ok(())
}
