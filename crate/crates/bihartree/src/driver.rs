//! Experiment orchestration: build operators from a config, construct
//! initial states, and run the evolution/diagnostic pipelines behind the
//! CLI subcommands. Everything here is the binary64 instantiation.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::checkpoint;
use crate::config::{InitialSpec, RunConfig};
use crate::diagnostics::{
    self, DiagnosticsEngine, DiagnosticsSample, EvacuationScan, ScatterReport, ThresholdRef,
};
use crate::dynamics::{self, EvolveConfig, EvolveHook, Model};
use crate::error::{Error, Result};
use crate::exponents::{self, CriticalExponents};
use crate::field::ComplexField;
use crate::fft::Direction;
use crate::grid::TorusGrid;
use crate::groundstate::{self, GroundStateResult, SolverOptions};
use crate::spectral::SpectralCache;
use crate::timeseries;

pub type Grid64 = TorusGrid<f64>;
pub type Field64 = ComplexField<f64>;
pub type Cache64 = SpectralCache<f64>;

/// A fully constructed experiment: grid, operator cache, model, and the
/// exponent table of the analytic parameters.
pub struct Experiment {
    pub cfg: RunConfig,
    pub grid: Arc<Grid64>,
    pub cache: Cache64,
    pub model: Model<f64>,
    pub exps: CriticalExponents<f64>,
    /// Morawetz space exponent with the grid dimension in place of the
    /// analytic one, used for simulation-level ball norms.
    pub r_star_sim: f64,
}

impl Experiment {
    pub fn build(cfg: RunConfig) -> Result<Self> {
        cfg.validate()?;
        let grid = Grid64::new(cfg.d, cfg.l, cfg.m)?;
        let mut cache = Cache64::new(
            grid.clone(),
            cfg.params.alpha,
            cfg.params.b,
            cfg.sigma,
            cfg.dealias,
        )?;
        cache.attach_diagnostics(cfg.r_diag)?;
        let model = Model::new(cfg.params.p, cfg.defocusing);
        let exps = exponents::compute_exponents(&cfg.params)?;
        let denom = cfg.d as f64 + cfg.params.alpha + 2.0 * cfg.params.b;
        if denom <= 0.0 {
            return Err(Error::ConfigValidation(format!(
                "d + alpha + 2b = {} must be positive for the ball-norm exponent",
                denom
            )));
        }
        let r_star_sim = 2.0 * cfg.d as f64 * cfg.params.p / denom;
        Ok(Self {
            cfg,
            grid,
            cache,
            model,
            exps,
            r_star_sim,
        })
    }

    /// Gaussian wave packet from the config's shape parameters.
    pub fn gaussian(&self, amplitude: f64, width: f64, center: &[f64], velocity: &[f64]) -> Field64 {
        let d = self.grid.d;
        ComplexField::tabulate(self.grid.clone(), |x| {
            let mut r2 = 0.0;
            let mut phase = 0.0;
            for ax in 0..d {
                let dx = x[ax] - center[ax];
                r2 += dx * dx;
                phase += velocity[ax] * x[ax];
            }
            Complex::from_polar(amplitude * (-r2 / (width * width)).exp(), phase)
        })
    }

    /// Deterministic unit-L2 smooth noise from the config seed: white
    /// complex samples low-passed by `exp(-|k|^2)`.
    pub fn smooth_noise(&self, seed: u64) -> Field64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut values: Vec<Complex<f64>> = (0..self.grid.len())
            .map(|_| {
                Complex::new(
                    rng.gen::<f64>() - 0.5,
                    rng.gen::<f64>() - 0.5,
                )
            })
            .collect();
        self.cache.plan().transform(&mut values, Direction::Forward);
        for (z, &k2) in values.iter_mut().zip(&self.cache.k2) {
            *z = z.scale((-k2).exp());
        }
        self.cache.plan().transform(&mut values, Direction::Inverse);
        let mut field = ComplexField::from_values(self.grid.clone(), values).expect("shape");
        let norm = field.norm();
        if norm > 0.0 {
            field.scale(Complex::new(1.0 / norm, 0.0));
        }
        field
    }

    /// Run the fixed-point solver with the configured seed profile.
    pub fn ground_state(&self) -> Result<GroundStateResult<f64>> {
        let seed = self.gaussian(
            self.cfg.gs_seed_amplitude,
            self.cfg.gs_seed_width,
            &vec![0.0; self.grid.d],
            &vec![0.0; self.grid.d],
        );
        let opts = SolverOptions {
            tol: self.cfg.gs_tol,
            max_iter: self.cfg.gs_max_iter,
            gamma: None,
        };
        groundstate::petviashvili(&self.cache, self.cfg.params.p, &seed, &opts)
    }

    /// Build the initial state; returns `(u0, t0, threshold reference)`.
    pub fn initial_state(&self) -> Result<(Field64, f64, Option<ThresholdRef<f64>>)> {
        match &self.cfg.initial {
            InitialSpec::Gaussian {
                amplitude,
                width,
                center,
                velocity,
            } => Ok((
                self.gaussian(*amplitude, *width, center, velocity),
                0.0,
                None,
            )),
            InitialSpec::GroundStateScaled { lambda, perturbation } => {
                let gs = self.ground_state()?;
                let mut u0 = gs.phi.scaled(Complex::new(*lambda, 0.0));
                if *perturbation > 0.0 {
                    let noise = self.smooth_noise(self.cfg.seed);
                    let scale = *perturbation * u0.norm();
                    u0.axpy(Complex::new(scale, 0.0), &noise);
                }
                let reference = ThresholdRef::from_ground_state(&gs, self.exps.s_c);
                Ok((u0, 0.0, Some(reference)))
            }
            InitialSpec::File { path } => {
                let (u, t, header) = checkpoint::read_checkpoint::<f64>(Path::new(path))?;
                if header.d != self.grid.d || header.m != self.grid.m || header.l != self.grid.l {
                    return Err(Error::ConfigValidation(format!(
                        "checkpoint grid ({}, {}, {}) does not match configured grid ({}, {}, {})",
                        header.d, header.l, header.m, self.grid.d, self.grid.l, self.grid.m
                    )));
                }
                Ok((u, t, None))
            }
        }
    }
}

/// Outputs of an `evolve` run.
pub struct EvolveOutputs {
    pub final_state: Field64,
    pub final_time: f64,
    pub samples: Vec<DiagnosticsSample<f64>>,
    pub csv_path: PathBuf,
    pub checkpoint_paths: Vec<PathBuf>,
}

struct RecordingHook<'a> {
    engine: DiagnosticsEngine<'a, f64>,
    csv_path: PathBuf,
    outdir: PathBuf,
    checkpoint_interval: usize,
    params: crate::exponents::ModelParams<f64>,
    samples: Vec<DiagnosticsSample<f64>>,
    checkpoint_paths: Vec<PathBuf>,
    total_steps: usize,
}

impl<'a> EvolveHook<f64> for RecordingHook<'a> {
    fn on_sample(&mut self, step: usize, t: f64, u: &Field64) -> Result<()> {
        let sample = self.engine.sample(t, u)?;
        timeseries::append_timeseries(&sample, &self.csv_path)?;
        self.samples.push(sample);
        let due = self.checkpoint_interval > 0
            && (step % self.checkpoint_interval == 0 || step == self.total_steps);
        if due {
            let path = self.outdir.join(format!("ckpt_{:08}.ckpt", step));
            checkpoint::write_checkpoint(&path, u, t, &self.params)?;
            self.checkpoint_paths.push(path);
        }
        Ok(())
    }
}

/// Run the main evolution loop with CSV and checkpoint persistence.
pub fn run_evolve(exp: &Experiment) -> Result<EvolveOutputs> {
    let outdir = PathBuf::from(&exp.cfg.outdir);
    std::fs::create_dir_all(&outdir).map_err(|e| Error::io(&outdir, e))?;
    let (u0, t0, threshold_ref) = exp.initial_state()?;
    let horizon = exp.cfg.t_final - t0;
    if horizon < 0.0 {
        return Err(Error::ConfigValidation(format!(
            "checkpoint time {} already past T = {}",
            t0, exp.cfg.t_final
        )));
    }
    let cfg = EvolveConfig {
        dt: exp.cfg.dt,
        t_final: horizon,
        cadence: exp.cfg.cadence,
        linear_only: exp.cfg.linear_only,
    };
    let csv_path = outdir.join("timeseries.csv");
    let mut hook = RecordingHook {
        engine: DiagnosticsEngine::new(
            &exp.cache,
            exp.model,
            exp.cfg.r_diag,
            exp.r_star_sim,
            threshold_ref,
        ),
        csv_path: csv_path.clone(),
        outdir: outdir.clone(),
        checkpoint_interval: exp.cfg.checkpoint_interval,
        params: exp.cfg.params,
        samples: Vec::new(),
        checkpoint_paths: Vec::new(),
        total_steps: cfg.steps(),
    };
    let final_state = dynamics::evolve(&exp.cache, &exp.model, &cfg, &u0, t0, &mut hook)?;
    let final_time = t0 + cfg.dt * cfg.steps() as f64;
    Ok(EvolveOutputs {
        final_state,
        final_time,
        samples: hook.samples,
        csv_path,
        checkpoint_paths: hook.checkpoint_paths,
    })
}

/// Identity-verification report: centered differences of the momentum
/// functional against the assembled flow derivative.
#[derive(Debug, Clone, serde::Serialize)]
pub struct MorawetzVerifyReport {
    pub rows: Vec<MorawetzVerifyRow>,
    pub max_rel_error: f64,
    pub median_rel_error: f64,
    pub term_assembly_gap: f64,
}

#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct MorawetzVerifyRow {
    pub t: f64,
    pub fd: f64,
    pub rhs: f64,
    pub rel_error: f64,
}

/// Evolve for `T/dt` steps recording the momentum functional every step,
/// then compare centered differences with the assembled derivative at up to
/// `max_rows` interior times.
pub fn run_morawetz_verify(exp: &Experiment, max_rows: usize) -> Result<MorawetzVerifyReport> {
    let (u0, _, _) = exp.initial_state()?;
    let steps = (exp.cfg.t_final / exp.cfg.dt).round() as usize;
    if steps < 3 {
        return Err(Error::ConfigValidation(
            "morawetz-verify needs at least 3 steps (increase T or decrease dt)".into(),
        ));
    }
    let virial = exp
        .cache
        .virial
        .as_ref()
        .expect("diagnostics attached at build");
    let stride = ((steps - 2) as f64 / max_rows as f64).ceil().max(1.0) as usize;
    let mut u = u0;
    let mut actions = Vec::with_capacity(steps + 1);
    actions.push(diagnostics::morawetz_action(&exp.cache, virial, &u)?);
    let mut rhs_at: Vec<(usize, f64, f64)> = Vec::new(); // (step, rhs, assembly gap)
    for k in 1..=steps {
        dynamics::strang_step(&exp.cache, &exp.model, &mut u, exp.cfg.dt, exp.cfg.linear_only)?;
        if !u.is_finite() {
            return Err(Error::NonFiniteState {
                t: exp.cfg.dt * k as f64,
                last_good: exp.cfg.dt * (k - 1) as f64,
            });
        }
        actions.push(diagnostics::morawetz_action(&exp.cache, virial, &u)?);
        if k < steps && k % stride == 0 {
            let rhs = diagnostics::morawetz_rhs(&exp.cache, &exp.model, virial, &u)?;
            let gap = (rhs.total() - rhs.fused_total).abs();
            rhs_at.push((k, rhs.total(), gap));
        }
    }
    let mut rows = Vec::new();
    let mut max_rel: f64 = 0.0;
    let mut rels = Vec::new();
    let mut assembly_gap: f64 = 0.0;
    for (k, rhs, gap) in rhs_at {
        let fd = (actions[k + 1] - actions[k - 1]) / (2.0 * exp.cfg.dt);
        let rel = (fd - rhs).abs() / rhs.abs().max(f64::MIN_POSITIVE);
        rows.push(MorawetzVerifyRow {
            t: exp.cfg.dt * k as f64,
            fd,
            rhs,
            rel_error: rel,
        });
        max_rel = max_rel.max(rel);
        rels.push(rel);
        assembly_gap = assembly_gap.max(gap);
    }
    rels.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let median = rels[rels.len() / 2];
    Ok(MorawetzVerifyReport {
        rows,
        max_rel_error: max_rel,
        median_rel_error: median,
        term_assembly_gap: assembly_gap,
    })
}

/// Read every checkpoint under the output directory, sorted by time, and
/// run the pullback Cauchy analysis.
pub fn run_scatter_scan(exp: &Experiment) -> Result<(ScatterReport<f64>, Field64)> {
    let outdir = PathBuf::from(&exp.cfg.outdir);
    let mut entries: Vec<(f64, PathBuf, Field64)> = Vec::new();
    let dir = std::fs::read_dir(&outdir).map_err(|e| Error::io(&outdir, e))?;
    for entry in dir {
        let entry = entry.map_err(|e| Error::io(&outdir, e))?;
        let path = entry.path();
        if path.extension().and_then(|s| s.to_str()) == Some("ckpt") {
            let (u, t, header) = checkpoint::read_checkpoint::<f64>(&path)?;
            if header.d == exp.grid.d && header.m == exp.grid.m && header.l == exp.grid.l {
                entries.push((t, path, u));
            }
        }
    }
    entries.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    if entries.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "scatter-scan found {} matching checkpoints under {}, needs >= 3",
            entries.len(),
            outdir.display()
        )));
    }
    let times: Vec<f64> = entries.iter().map(|e| e.0).collect();
    let states: Vec<Field64> = entries.into_iter().map(|e| e.2).collect();
    let threshold =
        exp.cfg.scatter_threshold_rel * diagnostics::h2_norm(&exp.cache, &states[0])?;
    diagnostics::scatter_detect(&exp.cache, &times, &states, threshold)
}

/// Evacuation scan over the stored time series.
pub fn run_evac_scan(exp: &Experiment) -> Result<EvacuationScan<f64>> {
    let csv = PathBuf::from(&exp.cfg.outdir).join("timeseries.csv");
    let ts = timeseries::read_timeseries(&csv)?;
    let t = ts
        .column("t")
        .ok_or_else(|| Error::InsufficientData("time series lacks a `t` column".into()))?;
    let lm = ts.column("local_mass").ok_or_else(|| {
        Error::InsufficientData("time series lacks a `local_mass` column".into())
    })?;
    diagnostics::evacuation_scan(&t, &lm)
}

/// Ground-state run artifacts.
#[derive(Debug, serde::Serialize)]
pub struct GroundStateSummary {
    pub mass: f64,
    #[serde(rename = "deltaSq")]
    pub delta_sq: f64,
    pub energy: f64,
    pub residual: f64,
    pub iterations: usize,
    pub s_final: f64,
    /// True when the analytic dimension differs from the grid dimension;
    /// thresholds normalized by this profile mix the two scales.
    pub analytic_dimension_mismatch: bool,
}

/// Solve for the ground state and persist the profile plus a JSON summary.
pub fn run_groundstate(exp: &Experiment) -> Result<(GroundStateResult<f64>, GroundStateSummary)> {
    let outdir = PathBuf::from(&exp.cfg.outdir);
    std::fs::create_dir_all(&outdir).map_err(|e| Error::io(&outdir, e))?;
    let gs = exp.ground_state()?;
    let summary = GroundStateSummary {
        mass: gs.mass,
        delta_sq: gs.delta_sq,
        energy: gs.energy,
        residual: gs.residual,
        iterations: gs.iterations,
        s_final: gs.s_history.last().copied().unwrap_or(f64::NAN),
        analytic_dimension_mismatch: exp.cfg.params.n as usize != exp.grid.d,
    };
    checkpoint::write_checkpoint(
        &outdir.join("groundstate.ckpt"),
        &gs.phi,
        0.0,
        &exp.cfg.params,
    )?;
    let json = serde_json::to_string_pretty(&summary)
        .map_err(|e| Error::io(&outdir, std::io::Error::other(e)))?;
    let path = outdir.join("groundstate.json");
    std::fs::write(&path, json).map_err(|e| Error::io(&path, e))?;
    Ok((gs, summary))
}

/// Dump every cache array as checkpoint-format files for debugging.
pub fn dump_cache(exp: &Experiment, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let p = &exp.cfg.params;
    let g = &exp.grid;
    checkpoint::write_real_array(&dir.join("k2.ckpt"), g, &exp.cache.k2, p)?;
    checkpoint::write_real_array(&dir.join("k4.ckpt"), g, &exp.cache.k4, p)?;
    checkpoint::write_real_array(&dir.join("riesz.ckpt"), g, &exp.cache.riesz, p)?;
    checkpoint::write_real_array(&dir.join("w_b.ckpt"), g, &exp.cache.w_b, p)?;
    if let Some(psi) = &exp.cache.psi {
        checkpoint::write_real_array(&dir.join("psi.ckpt"), g, psi, p)?;
    }
    if let Some(v) = &exp.cache.virial {
        checkpoint::write_real_array(&dir.join("virial_a.ckpt"), g, &v.a, p)?;
        checkpoint::write_real_array(&dir.join("virial_lap.ckpt"), g, &v.lap, p)?;
        checkpoint::write_real_array(&dir.join("virial_lap2.ckpt"), g, &v.lap2, p)?;
        checkpoint::write_real_array(&dir.join("virial_lap3.ckpt"), g, &v.lap3, p)?;
        for (ax, gr) in v.grad.iter().enumerate() {
            checkpoint::write_real_array(&dir.join(format!("virial_grad{}.ckpt", ax)), g, gr, p)?;
        }
    }
    Ok(())
}

/// Key/value lines of the exponent report for one parameter point.
pub fn exponent_report(exp: &Experiment) -> Vec<(String, String)> {
    let e = &exp.exps;
    let c = exponents::check_condition_c(&exp.cfg.params);
    let range = exponents::in_intercritical_range(&exp.cfg.params, e);
    let mut rows = vec![
        ("N".to_string(), exp.cfg.params.n.to_string()),
        ("alpha".to_string(), format!("{}", exp.cfg.params.alpha)),
        ("b".to_string(), format!("{}", exp.cfg.params.b)),
        ("p".to_string(), format!("{}", exp.cfg.params.p)),
        ("s_c".to_string(), format!("{}", e.s_c)),
        ("p_star".to_string(), format!("{}", e.p_star)),
        ("p_upper".to_string(), format!("{}", e.p_upper)),
        ("B".to_string(), format!("{}", e.b_power)),
        ("r1".to_string(), format!("{}", e.r1)),
        ("r_star".to_string(), format!("{}", e.r_star)),
        ("condition_C".to_string(), c.valid.to_string()),
        ("intercritical_nonradial".to_string(), range.nonradial.to_string()),
        ("intercritical_radial".to_string(), range.radial.to_string()),
    ];
    if let Some(x) = e.x_alpha {
        rows.insert(7, ("x_alpha".to_string(), format!("{}", x)));
    }
    rows
}

#[derive(Debug, serde::Serialize)]
pub struct ExponentJson {
    #[serde(rename = "N")]
    pub n: u32,
    pub alpha: f64,
    pub b: f64,
    pub p: f64,
    pub s_c: f64,
    pub p_star: f64,
    pub p_upper: f64,
    pub x_alpha: Option<f64>,
    #[serde(rename = "B")]
    pub b_power: f64,
    pub r1: f64,
    pub r_star: f64,
    pub condition_c: bool,
    pub intercritical_nonradial: bool,
    pub intercritical_radial: bool,
}

pub fn exponent_json(exp: &Experiment) -> ExponentJson {
    let e = &exp.exps;
    let c = exponents::check_condition_c(&exp.cfg.params);
    let range = exponents::in_intercritical_range(&exp.cfg.params, e);
    ExponentJson {
        n: exp.cfg.params.n,
        alpha: exp.cfg.params.alpha,
        b: exp.cfg.params.b,
        p: exp.cfg.params.p,
        s_c: e.s_c,
        p_star: e.p_star,
        p_upper: e.p_upper,
        x_alpha: e.x_alpha,
        b_power: e.b_power,
        r1: e.r1,
        r_star: e.r_star,
        condition_c: c.valid,
        intercritical_nonradial: range.nonradial,
        intercritical_radial: range.radial,
    }
}
