//! Parameter-grid orchestration: (theta, h_x) sweeps, exceptional-point
//! lines, and circuit resource tables, with deterministic CSV emission.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circuit::{build_trotter_circuit, cnot_count};
use crate::hamiltonian::{FieldPattern, HamiltonianSpec};
use crate::mitigation::{mitigate, ConfusionSpec, DEFAULT_HAMMING_CUTOFF};
use crate::noise::NoiseModel;
use crate::oracle::{exceptional_theta, DEFAULT_BISECTION_TOL, DEFAULT_THETA_MAX};
use crate::simulator::{expectation_observable, post_select, run_postselected_exact, run_shots};
use crate::scalar::EigScalar;
use crate::{Error, Real, Result};

/// Evenly spaced closed-interval grid; `count = 1` degenerates to `[min]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec<R> {
    pub min: R,
    pub max: R,
    pub count: usize,
}

impl<R: Real> GridSpec<R> {
    pub fn values(&self) -> Vec<R> {
        if self.count <= 1 {
            return vec![self.min];
        }
        let step = (self.max - self.min) / R::of((self.count - 1) as f64);
        (0..self.count)
            .map(|k| self.min + step * R::of(k as f64))
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        if self.count < 1 {
            return Err(Error::InvalidParameter("grid count must be >= 1".into()));
        }
        Ok(())
    }
}

fn default_lambda<R: Real>() -> R {
    R::one()
}
fn default_dt<R: Real>() -> R {
    R::of(0.3)
}
fn default_shots() -> u64 {
    100_000
}
fn default_theta_grid<R: Real>() -> GridSpec<R> {
    GridSpec {
        min: R::of(0.02),
        max: R::of(1.0),
        count: 10,
    }
}
fn default_hx_grid<R: Real>() -> GridSpec<R> {
    GridSpec {
        min: R::of(0.02),
        max: R::of(2.0),
        count: 10,
    }
}
fn default_cutoff() -> usize {
    DEFAULT_HAMMING_CUTOFF
}

/// Step counts matching the hardware-run budget per chain size.
pub fn default_n_steps(n_sites: usize) -> usize {
    match n_sites {
        0..=2 => 7,
        3..=4 => 5,
        _ => 4,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
#[serde(bound = "R: Real + Serialize + serde::de::DeserializeOwned")]
pub struct SweepConfig<R> {
    pub n_sites: usize,
    pub pattern: FieldPattern,
    #[serde(default = "default_lambda")]
    pub lambda: R,
    #[serde(default = "default_dt")]
    pub dt: R,
    /// Trotter step count; defaults per chain size when absent.
    #[serde(default)]
    pub n_steps: Option<usize>,
    #[serde(default = "default_theta_grid")]
    pub theta_grid: GridSpec<R>,
    #[serde(default = "default_hx_grid")]
    pub hx_grid: GridSpec<R>,
    #[serde(default = "default_shots")]
    pub n_shots: u64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub noise: Option<NoiseModel<R>>,
    #[serde(default)]
    pub mitigate: bool,
    #[serde(default = "default_cutoff")]
    pub hamming_cutoff: usize,
}

impl<R: Real> SweepConfig<R> {
    pub fn new(n_sites: usize, pattern: FieldPattern) -> Self {
        SweepConfig {
            n_sites,
            pattern,
            lambda: default_lambda(),
            dt: default_dt(),
            n_steps: None,
            theta_grid: default_theta_grid(),
            hx_grid: default_hx_grid(),
            n_shots: default_shots(),
            seed: 0,
            noise: None,
            mitigate: false,
            hamming_cutoff: default_cutoff(),
        }
    }

    pub fn n_steps_resolved(&self) -> usize {
        self.n_steps.unwrap_or_else(|| default_n_steps(self.n_sites))
    }

    pub fn validate(&self) -> Result<()> {
        if self.dt <= R::zero() {
            return Err(Error::InvalidParameter("dt must be > 0".into()));
        }
        self.theta_grid.validate()?;
        self.hx_grid.validate()?;
        if let Some(noise) = &self.noise {
            noise.validate()?;
        }
        Ok(())
    }
}

/// One grid point of a sweep. Optional fields are absent when the point
/// failed or the quantity was not requested; `error` carries the reason.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow<R> {
    pub theta: R,
    pub h_x: R,
    pub expectation_raw: Option<R>,
    pub expectation_mitigated: Option<R>,
    pub postselect_fraction: Option<R>,
    pub survival_exact: Option<R>,
    pub exceptional_theta_at_hx: Option<R>,
    pub error: Option<String>,
}

fn point_seed(master: u64, index: usize) -> u64 {
    master ^ (index as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

fn sweep_point<R: Real>(
    config: &SweepConfig<R>,
    theta: R,
    h_x: R,
    index: usize,
) -> Result<(R, Option<R>, R, R)> {
    let spec = HamiltonianSpec::new(config.lambda, h_x, theta, config.n_sites, config.pattern)?;
    let n_steps = config.n_steps_resolved();
    let circuit = build_trotter_circuit(&spec, config.dt, n_steps)?;
    let table = run_shots(
        &circuit,
        config.n_shots,
        point_seed(config.seed, index),
        config.noise.as_ref(),
    )?;
    let (kept, fraction) = post_select(&table);
    let raw = expectation_observable::<R>(&kept, config.n_sites)?;
    let mitigated = if config.mitigate {
        let cspec = match &config.noise {
            Some(noise) => ConfusionSpec::from_noise_model(noise, config.n_sites),
            None => ConfusionSpec::identity(config.n_sites),
        };
        Some(mitigate(&kept, &cspec, config.hamming_cutoff)?.expectation_observable(config.n_sites))
    } else {
        None
    };
    let (_, survival) = run_postselected_exact(&spec, config.dt, n_steps, None)?;
    Ok((raw, mitigated, R::of(fraction), survival))
}

/// Run the full (theta, h_x) grid, row-major with theta as the outer loop.
/// Points run in parallel; output order is the grid order. A failing point
/// records its error in the row and the sweep continues.
pub fn run_sweep<R: EigScalar>(config: &SweepConfig<R>) -> Result<Vec<SweepRow<R>>> {
    config.validate()?;
    let thetas = config.theta_grid.values();
    let hxs = config.hx_grid.values();

    // One bisection per h_x column, shared across theta rows.
    let base = HamiltonianSpec::new(
        config.lambda,
        hxs[0].max(R::of(1e-6)),
        R::zero(),
        config.n_sites,
        config.pattern,
    )?;
    let exceptional: Vec<Option<R>> = hxs
        .par_iter()
        .map(|&h_x| {
            if h_x <= R::zero() {
                return None;
            }
            exceptional_theta(&base, h_x, R::of(DEFAULT_BISECTION_TOL), R::of(DEFAULT_THETA_MAX))
                .ok()
                .map(|ep| ep.theta_star)
        })
        .collect();

    let points: Vec<(usize, R, R)> = thetas
        .iter()
        .flat_map(|&theta| hxs.iter().map(move |&h_x| (theta, h_x)))
        .enumerate()
        .map(|(i, (t, h))| (i, t, h))
        .collect();

    let rows: Vec<SweepRow<R>> = points
        .par_iter()
        .map(|&(index, theta, h_x)| {
            let ep = exceptional[index % hxs.len()];
            match sweep_point(config, theta, h_x, index) {
                Ok((raw, mitigated, fraction, survival)) => SweepRow {
                    theta,
                    h_x,
                    expectation_raw: Some(raw),
                    expectation_mitigated: mitigated,
                    postselect_fraction: Some(fraction),
                    survival_exact: Some(survival),
                    exceptional_theta_at_hx: ep,
                    error: None,
                },
                Err(e) => SweepRow {
                    theta,
                    h_x,
                    expectation_raw: None,
                    expectation_mitigated: None,
                    postselect_fraction: None,
                    survival_exact: None,
                    exceptional_theta_at_hx: ep,
                    error: Some(e.to_string()),
                },
            }
        })
        .collect();
    Ok(rows)
}

/// One point of the exceptional line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExceptionalRow<R> {
    pub h_x: R,
    pub theta_star: Option<R>,
    pub bracket_width: Option<R>,
    pub error: Option<String>,
}

/// Bisect the exceptional theta at each h_x of the grid. Bracket failures
/// are recorded per point.
pub fn exceptional_line<R: EigScalar>(
    n_sites: usize,
    pattern: FieldPattern,
    lambda: R,
    hx_grid: &GridSpec<R>,
    tol: R,
) -> Result<Vec<ExceptionalRow<R>>> {
    hx_grid.validate()?;
    let base = HamiltonianSpec::new(lambda, R::one(), R::zero(), n_sites, pattern)?;
    Ok(hx_grid
        .values()
        .par_iter()
        .map(|&h_x| match exceptional_theta(&base, h_x, tol, R::of(DEFAULT_THETA_MAX)) {
            Ok(ep) => ExceptionalRow {
                h_x,
                theta_star: Some(ep.theta_star),
                bracket_width: Some(ep.bracket_width),
                error: None,
            },
            Err(e) => ExceptionalRow {
                h_x,
                theta_star: None,
                bracket_width: None,
                error: Some(e.to_string()),
            },
        })
        .collect())
}

/// Warning text when a computed line is not monotone non-decreasing in h_x,
/// the shape the exceptional lines are expected to have.
pub fn monotonicity_warning<R: Real>(rows: &[ExceptionalRow<R>]) -> Option<String> {
    let found: Vec<(R, R)> = rows
        .iter()
        .filter_map(|r| r.theta_star.map(|t| (r.h_x, t)))
        .collect();
    for w in found.windows(2) {
        if w[1].1 < w[0].1 - R::of(1e-9) {
            return Some(format!(
                "exceptional line is not monotone: theta*({}) = {} < theta*({}) = {}",
                w[1].0.to_f64_lossy(),
                w[1].1.to_f64_lossy(),
                w[0].0.to_f64_lossy(),
                w[0].1.to_f64_lossy()
            ));
        }
    }
    None
}

/// Circuit resource count for one configuration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResourceRow {
    pub n_sites: usize,
    pub n_steps: usize,
    pub cnots: usize,
    pub measurements: usize,
}

/// CNOT and measurement counts of the lowered Trotter circuit. The counts
/// depend only on size, pattern, and step count, not on the angles.
pub fn resources_row(n_sites: usize, pattern: FieldPattern, n_steps: usize) -> Result<ResourceRow> {
    let spec = HamiltonianSpec::<f64>::new(1.0, 1.0, 0.1, n_sites, pattern)?;
    let circuit = build_trotter_circuit(&spec, 0.3, n_steps)?;
    Ok(ResourceRow {
        n_sites,
        n_steps,
        cnots: cnot_count(&circuit),
        measurements: circuit.measurement_count(),
    })
}

pub fn resources_table(rows: &[ResourceRow]) -> String {
    let mut out = String::new();
    writeln!(out, "{:>7} {:>7} {:>7} {:>12}", "N", "N_t", "CNOTs", "measurements").unwrap();
    for r in rows {
        writeln!(
            out,
            "{:>7} {:>7} {:>7} {:>12}",
            r.n_sites, r.n_steps, r.cnots, r.measurements
        )
        .unwrap();
    }
    out
}

fn fmt_opt<R: Real>(x: Option<R>) -> String {
    match x {
        Some(x) => format!("{:.12e}", x.to_f64_lossy()),
        None => String::new(),
    }
}

fn csv_escape(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Fixed-header CSV of sweep rows; byte-identical for identical inputs.
pub fn sweep_to_csv<R: Real>(rows: &[SweepRow<R>]) -> String {
    let mut out = String::from(
        "theta,h_x,expectation_raw,expectation_mitigated,postselect_fraction,survival_exact,exceptional_theta_at_hx,error\n",
    );
    for r in rows {
        writeln!(
            out,
            "{:.12e},{:.12e},{},{},{},{},{},{}",
            r.theta.to_f64_lossy(),
            r.h_x.to_f64_lossy(),
            fmt_opt(r.expectation_raw),
            fmt_opt(r.expectation_mitigated),
            fmt_opt(r.postselect_fraction),
            fmt_opt(r.survival_exact),
            fmt_opt(r.exceptional_theta_at_hx),
            csv_escape(r.error.as_deref().unwrap_or("")),
        )
        .unwrap();
    }
    out
}

pub fn exceptional_to_csv<R: Real>(rows: &[ExceptionalRow<R>]) -> String {
    let mut out = String::from("h_x,theta_star,bracket_width,error\n");
    for r in rows {
        writeln!(
            out,
            "{:.12e},{},{},{}",
            r.h_x.to_f64_lossy(),
            fmt_opt(r.theta_star),
            fmt_opt(r.bracket_width),
            csv_escape(r.error.as_deref().unwrap_or("")),
        )
        .unwrap();
    }
    out
}

pub fn resources_to_csv(rows: &[ResourceRow]) -> String {
    let mut out = String::from("n_sites,n_steps,cnots,measurements\n");
    for r in rows {
        writeln!(out, "{},{},{},{}", r.n_sites, r.n_steps, r.cnots, r.measurements).unwrap();
    }
    out
}
