//! Report serialization: JSON summaries with pinned conventions, and CSV
//! series for plots. Reports carry no timestamps, so a fixed (config, seed)
//! pair yields byte-identical output.

use serde::Serialize;
use std::fmt::Write as _;

use crate::hum::{ControlSolution, HumSystem};
use crate::kdv::{PicardRun, Trajectory};
use crate::observability::GramReport;
use crate::spectral::FourierState;

/// The normalization conventions every report embeds, so numbers are
/// portable across implementations.
#[derive(Clone, Debug, Serialize)]
pub struct Conventions {
    pub fourier: &'static str,
    pub indicator: &'static str,
    pub gram: &'static str,
    pub l2_norm: &'static str,
}

impl Default for Conventions {
    fn default() -> Self {
        Self {
            fourier: "uhat(k) = (1/2pi) * integral of u(x) exp(-ikx) dx",
            indicator: "ghat_G(alpha) = (1/(2pi*T)) * integral of 1_G exp(-i alpha.z) dz",
            gram: "entries are plain integrals of exp(i (lambda-mu).z) over G",
            l2_norm: "norm^2 = 2pi * sum of |uhat(k)|^2",
        }
    }
}

/// Provenance header shared by all workflow reports.
#[derive(Clone, Debug, Serialize)]
pub struct Provenance {
    pub workflow: String,
    pub config_hash: String,
    pub seed: u64,
    pub truncation: usize,
    pub conventions: Conventions,
}

impl Provenance {
    pub fn new(workflow: &str, config_text: &str, seed: u64, truncation: usize) -> Self {
        Self {
            workflow: workflow.to_string(),
            config_hash: format!("{:016x}", fnv1a(config_text.as_bytes())),
            seed,
            truncation,
            conventions: Conventions::default(),
        }
    }
}

/// FNV-1a content hash used for config provenance.
pub fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf29ce484222325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}

/// JSON body of an observability certificate.
#[derive(Clone, Debug, Serialize)]
pub struct GramReportJson {
    pub freq_set: String,
    pub region: String,
    pub normalization: f64,
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub constant: Option<f64>,
    #[serde(rename = "N")]
    pub n_threshold: Option<i64>,
    pub theta: Option<u32>,
    pub tail_energy: Option<f64>,
}

impl GramReportJson {
    pub fn new(report: &GramReport, freq_set: String, region: String) -> Self {
        Self {
            freq_set,
            region,
            normalization: 1.0,
            lambda_min: report.lambda_min,
            lambda_max: report.lambda_max,
            constant: report.observability_constant,
            n_threshold: report.n_threshold,
            theta: report.theta,
            tail_energy: report.tail_energy,
        }
    }
}

/// JSON body of a linear control run.
#[derive(Clone, Debug, Serialize)]
pub struct ControlReportJson {
    pub lambda_min_phi: f64,
    pub condition_number: f64,
    pub cg_iterations: usize,
    pub endpoint_residual: f64,
    pub control_cost: f64,
    pub cost_constant: Option<f64>,
}

impl ControlReportJson {
    pub fn new(sys: &HumSystem, sol: &ControlSolution) -> Self {
        Self {
            lambda_min_phi: sys.lambda_min_phi(),
            condition_number: sys.condition_number(),
            cg_iterations: sol.cg_iterations,
            endpoint_residual: sol.endpoint_residual,
            control_cost: sol.cost,
            cost_constant: sol.cost_constant,
        }
    }
}

/// JSON body of a Picard fixed-point run.
#[derive(Clone, Debug, Serialize)]
pub struct PicardReportJson {
    pub converged: bool,
    pub diverged: bool,
    pub iterations: usize,
    pub endpoint_errors: Vec<f64>,
    pub contraction_estimates: Vec<f64>,
    pub contraction_factor: Option<f64>,
    pub data_norm: f64,
    pub mean_level: f64,
    pub mass_drift: Option<f64>,
}

impl PicardReportJson {
    pub fn new(run: &PicardRun) -> Self {
        Self {
            converged: run.converged,
            diverged: run.diverged,
            iterations: run.iterates.len(),
            endpoint_errors: run.iterates.iter().map(|i| i.endpoint_error).collect(),
            contraction_estimates: run.contraction_estimates.clone(),
            contraction_factor: run.contraction_factor(),
            data_norm: run.data_norm,
            mean_level: run.mean_level,
            mass_drift: run.final_trajectory.as_ref().map(|t| t.mass_drift()),
        }
    }
}

/// JSON body of a decay experiment.
#[derive(Clone, Debug, Serialize)]
pub struct DecayReportJson {
    pub block_norms: Vec<f64>,
    pub alphas: Vec<f64>,
    pub gamma_fit: f64,
    pub energy_identity_gaps: Vec<f64>,
    pub anomalies: Vec<usize>,
    pub blocks_used: usize,
}

impl DecayReportJson {
    pub fn new(rep: &crate::damping::DecayReport) -> Self {
        Self {
            block_norms: rep.block_norms.clone(),
            alphas: rep.alphas.clone(),
            gamma_fit: rep.gamma_fit,
            energy_identity_gaps: rep.energy_identity_gaps.clone(),
            anomalies: rep.anomalies.clone(),
            blocks_used: rep.blocks_used,
        }
    }
}

/// Full report document: provenance plus one workflow body.
#[derive(Clone, Debug, Serialize)]
pub struct Document<T: Serialize> {
    pub provenance: Provenance,
    pub report: T,
}

pub fn to_json_pretty<T: Serialize>(doc: &T) -> String {
    serde_json::to_string_pretty(doc).expect("report serialization cannot fail")
}

/// CSV of a trajectory: `t` then `re_k`/`im_k` columns in fixed `k` order.
pub fn trajectory_csv(traj: &Trajectory) -> String {
    let n = traj.states()[0].n_max() as i64;
    let mut out = String::from("t");
    for k in -n..=n {
        let _ = write!(out, ",re_{k},im_{k}");
    }
    out.push('\n');
    for (i, s) in traj.states().iter().enumerate() {
        let _ = write!(out, "{:.12e}", traj.times()[i]);
        for k in -n..=n {
            let c = s.coeff(k);
            let _ = write!(out, ",{:.12e},{:.12e}", c.re, c.im);
        }
        out.push('\n');
    }
    out
}

/// CSV of control samples `h(t_j, x_i)` on a declared grid (real part; the
/// control of real data is real up to rounding).
pub fn control_csv(sys: &HumSystem, psi: &FourierState, nt: usize, nx: usize) -> String {
    let t_end = sys.t_horizon();
    let mut out = String::from("t");
    for i in 0..nx {
        let _ = write!(out, ",x_{i}");
    }
    out.push('\n');
    let grid = crate::spectral::GridTransform::new(nx);
    for j in 0..nt {
        let t = t_end * j as f64 / nt as f64;
        let h = sys.control_at(psi, t);
        let values = grid.to_grid(&h).expect("control grid resolves the band");
        let _ = write!(out, "{:.12e}", t);
        for v in values {
            let _ = write!(out, ",{:.12e}", v.re);
        }
        out.push('\n');
    }
    out
}

/// CSV of decay data: `n, norm, alpha` per block.
pub fn decay_csv(rep: &crate::damping::DecayReport, block_t: f64) -> String {
    let mut out = String::from("n,t,norm,alpha\n");
    for (n, norm) in rep.block_norms.iter().enumerate() {
        let alpha = if n == 0 {
            String::new()
        } else {
            format!("{:.12e}", rep.alphas[n - 1])
        };
        let _ = writeln!(out, "{},{:.12e},{:.12e},{}", n, n as f64 * block_t, norm, alpha);
    }
    out
}

/// CSV dump of Gram eigenvalues.
pub fn eigenvalue_csv(report: &GramReport) -> String {
    let eig = report.gram.clone().symmetric_eigen();
    let mut values: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    values.sort_by(f64::total_cmp);
    let mut out = String::from("index,eigenvalue\n");
    for (i, v) in values.iter().enumerate() {
        let _ = writeln!(out, "{},{:.12e}", i, v);
    }
    out
}
