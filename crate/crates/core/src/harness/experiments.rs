//! End-to-end experiments: each one turns a configuration into result tables.

use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::harness::config::{ExperimentConfig, PreparedModel};
use crate::harness::table::{emit_csv, ColumnKind, Metadata, ResultTable};
use crate::quasi_lorentzian::{scaling_exponent, QuasiLorentzian};
use crate::rank_one::{concentration_from, golden_rule_width, sojourn_from, sojourn_plancherel, survival_from};

use ColumnKind::{Complex, Real};

/// Environment variable capping the number of worker threads.
pub const THREADS_ENV: &str = "RESONANCE_LAB_THREADS";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    Decay,
    Scaling,
    Sojourn,
    Concentration,
    SpectrumCheck,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::Decay => "decay",
            Experiment::Scaling => "scaling",
            Experiment::Sojourn => "sojourn",
            Experiment::Concentration => "concentration",
            Experiment::SpectrumCheck => "spectrum-check",
        }
    }
}

impl FromStr for Experiment {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "decay" => Experiment::Decay,
            "scaling" => Experiment::Scaling,
            "sojourn" => Experiment::Sojourn,
            "concentration" => Experiment::Concentration,
            "spectrum-check" => Experiment::SpectrumCheck,
            other => return Err(Error::Config(format!("unknown experiment {other:?}"))),
        })
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RunOptions {
    /// Single worker; the reference mode for byte-identical output.
    pub serial: bool,
}

/// Worker count: 1 in serial mode, else the environment cap or rayon's default.
pub fn worker_count(options: RunOptions) -> Result<usize> {
    if options.serial {
        return Ok(1);
    }
    match std::env::var(THREADS_ENV) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(n),
            _ => Err(Error::Config(format!("{THREADS_ENV} must be a positive integer, got {v:?}"))),
        },
        Err(_) => Ok(rayon::current_num_threads()),
    }
}

fn with_pool<T: Send>(options: RunOptions, f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(worker_count(options)?)
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
    Ok(pool.install(f))
}

fn metadata(config: &ExperimentConfig, experiment: Experiment) -> Metadata {
    Metadata::new(&config.hash, experiment.name())
}

fn line_shapes(config: &ExperimentConfig, prepared: &PreparedModel) -> Result<Vec<QuasiLorentzian>> {
    let cutoff = config.cutoff()?;
    config
        .sweep
        .kappa
        .par_iter()
        .map(|&kappa| {
            prepared
                .rank_one
                .line_shape(kappa, cutoff)
                .map_err(|e| e.context(format!("kappa = {kappa}")))
        })
        .collect()
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
        .collect()
}

/// Per-coupling tables `(t, A, |A|, |approx|, |R|)` and a resonance summary.
pub fn run_decay(config: &ExperimentConfig, prepared: &PreparedModel) -> Result<Vec<ResultTable>> {
    let meta = metadata(config, Experiment::Decay);
    let gamma0 = golden_rule_width(&prepared.rank_one)?;
    let shapes = line_shapes(config, prepared)?;
    let mut summary = ResultTable::new(
        "decay_summary",
        &[
            ("kappa", Real),
            ("lambda_kappa", Real),
            ("lambda_inf", Real),
            ("zeta", Complex),
            ("c", Complex),
            ("decay_rate", Real),
            ("fixed_point_residual", Real),
            ("golden_rule_width", Real),
        ],
        meta.clone(),
    );
    let mut tables = Vec::new();
    for (index, shape) in shapes.iter().enumerate() {
        let p = *shape.params();
        summary.push(vec![
            p.kappa.into(),
            p.lambda_kappa.into(),
            p.lambda_inf.into(),
            p.zeta.into(),
            p.c.into(),
            p.decay_rate().into(),
            p.residual.into(),
            gamma0.into(),
        ])?;
        let t_max = config.sweep.t_max.unwrap_or(5.0 / p.decay_rate());
        let rows = linspace(0.0, t_max, config.sweep.t_points)
            .into_par_iter()
            .map(|t| {
                survival_from(shape, t).map_err(|e| e.context(format!("kappa = {}, t = {t}", p.kappa)))
            })
            .collect::<Result<Vec<_>>>()?;
        let mut table = ResultTable::new(
            &format!("decay_kappa_{index:02}"),
            &[
                ("t", Real),
                ("amplitude", Complex),
                ("abs_amplitude", Real),
                ("abs_exponential", Real),
                ("abs_remainder", Real),
            ],
            meta.clone(),
        );
        for s in rows {
            table.push(vec![
                s.t.into(),
                s.amplitude.into(),
                s.amplitude.norm().into(),
                s.exponential.norm().into(),
                s.remainder.norm().into(),
            ])?;
        }
        tables.push(table);
    }
    tables.insert(0, summary);
    Ok(tables)
}

/// Times at which `sup |R|` and `sup |t||R|` are sampled for decay rate `gamma`.
pub fn scaling_grid(gamma: f64) -> Vec<f64> {
    let horizon = 10.0 / gamma;
    let mut grid: Vec<f64> = (0..=1000).map(|i| 0.05 * i as f64).collect();
    let mut t = 0.1;
    while t < horizon {
        grid.push(t);
        t *= 2.0;
    }
    grid.extend((1..=200).map(|i| i as f64 / (200.0 * gamma)));
    grid.push(horizon);
    grid.retain(|t| *t <= horizon);
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    grid
}

/// Suprema of the remainder per coupling, and their log-log fits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RemainderSup {
    pub kappa: f64,
    pub sup_r: f64,
    pub argsup_r: f64,
    pub sup_tr: f64,
    pub argsup_tr: f64,
}

pub fn remainder_sup(shape: &QuasiLorentzian) -> Result<RemainderSup> {
    let kappa = shape.kappa();
    let grid = scaling_grid(shape.params().decay_rate());
    let values = grid
        .par_iter()
        .map(|&t| {
            shape
                .error_term(t)
                .map(|r| r.norm())
                .map_err(|e| e.context(format!("kappa = {kappa}, t = {t}")))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut out = RemainderSup {
        kappa,
        sup_r: 0.0,
        argsup_r: 0.0,
        sup_tr: 0.0,
        argsup_tr: 0.0,
    };
    for (&t, &r) in grid.iter().zip(&values) {
        if r > out.sup_r {
            out.sup_r = r;
            out.argsup_r = t;
        }
        if t * r > out.sup_tr {
            out.sup_tr = t * r;
            out.argsup_tr = t;
        }
    }
    Ok(out)
}

/// `sup |R|` and `sup |t||R|` per coupling plus fitted exponents.
pub fn run_scaling(config: &ExperimentConfig, prepared: &PreparedModel) -> Result<Vec<ResultTable>> {
    if config.sweep.kappa.len() < 4 {
        return Err(Error::InsufficientData(format!(
            "scaling needs at least 4 couplings, got {}",
            config.sweep.kappa.len()
        )));
    }
    let meta = metadata(config, Experiment::Scaling);
    let shapes = line_shapes(config, prepared)?;
    let sups = shapes
        .par_iter()
        .map(remainder_sup)
        .collect::<Result<Vec<_>>>()?;
    let mut samples = ResultTable::new(
        "scaling_samples",
        &[
            ("kappa", Real),
            ("sup_r", Real),
            ("argsup_r", Real),
            ("sup_tr", Real),
            ("argsup_tr", Real),
            ("c_kappa", Real),
        ],
        meta.clone(),
    );
    for s in &sups {
        let c = s.sup_tr / (s.kappa * s.kappa * s.kappa.ln().abs());
        samples.push(vec![
            s.kappa.into(),
            s.sup_r.into(),
            s.argsup_r.into(),
            s.sup_tr.into(),
            s.argsup_tr.into(),
            c.into(),
        ])?;
    }
    let fit_r = scaling_exponent(&sups.iter().map(|s| (s.kappa, s.sup_r)).collect::<Vec<_>>())?;
    let fit_tr = scaling_exponent(&sups.iter().map(|s| (s.kappa, s.sup_tr)).collect::<Vec<_>>())?;
    let mut fit = ResultTable::new(
        "scaling_fit",
        &[
            ("slope_sup_r", Real),
            ("residual_sup_r", Real),
            ("slope_sup_tr", Real),
            ("residual_sup_tr", Real),
            ("log_corrected_c", Real),
            ("log_corrected_residual", Real),
        ],
        meta,
    );
    fit.push(vec![
        fit_r.slope.into(),
        fit_r.residual.into(),
        fit_tr.slope.into(),
        fit_tr.residual.into(),
        fit_tr.log_corrected_c.into(),
        fit_tr.log_corrected_residual.into(),
    ])?;
    Ok(vec![samples, fit])
}

/// `(κ, τ, 1/(κ²Γ_κ), difference)` with the Plancherel cross-check.
pub fn run_sojourn(config: &ExperimentConfig, prepared: &PreparedModel) -> Result<Vec<ResultTable>> {
    let shapes = line_shapes(config, prepared)?;
    let rows = shapes
        .par_iter()
        .map(|shape| {
            let kappa = shape.kappa();
            let s = sojourn_from(shape, config.sweep.t_max).map_err(|e| e.context(format!("kappa = {kappa}")))?;
            let p = sojourn_plancherel(shape).map_err(|e| e.context(format!("kappa = {kappa}")))?;
            Ok((s, p))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut table = ResultTable::new(
        "sojourn",
        &[
            ("kappa", Real),
            ("tau", Real),
            ("lifetime", Real),
            ("difference", Real),
            ("normalized", Real),
            ("tail", Real),
            ("tau_plancherel", Real),
        ],
        metadata(config, Experiment::Sojourn),
    );
    for (s, p) in rows {
        table.push(vec![
            s.kappa.into(),
            s.tau.into(),
            s.lifetime.into(),
            s.difference().into(),
            s.normalized().into(),
            s.tail.into(),
            p.into(),
        ])?;
    }
    Ok(vec![table])
}

/// `(t, κ, value, e^{−|t|}, gap)` for every rescaled time and coupling.
pub fn run_concentration(config: &ExperimentConfig, prepared: &PreparedModel) -> Result<Vec<ResultTable>> {
    let shapes = line_shapes(config, prepared)?;
    let cells: Vec<(f64, &QuasiLorentzian)> = config
        .sweep
        .concentration_t
        .iter()
        .flat_map(|&t| shapes.iter().map(move |s| (t, s)))
        .collect();
    let values = cells
        .par_iter()
        .map(|&(t, shape)| {
            concentration_from(shape, t).map_err(|e| e.context(format!("kappa = {}, t = {t}", shape.kappa())))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut table = ResultTable::new(
        "concentration",
        &[
            ("t", Real),
            ("kappa", Real),
            ("value", Complex),
            ("exponential", Real),
            ("gap", Real),
        ],
        metadata(config, Experiment::Concentration),
    );
    for (&(t, shape), value) in cells.iter().zip(values) {
        let target = (-t.abs()).exp();
        table.push(vec![
            t.into(),
            shape.kappa().into(),
            value.into(),
            target.into(),
            (value - target).norm().into(),
        ])?;
    }
    Ok(vec![table])
}

/// Tables of the spectrum check and, when the hypothesis fails, why.
#[derive(Debug, Clone)]
pub struct SpectrumReport {
    pub tables: Vec<ResultTable>,
    pub min_im_f0: f64,
    pub violation: Option<String>,
}

/// Checks `Im 𝓕₀(λ + i0) > 0` on the grid and reports the coupled resolvent,
/// including its finite value at `λ₀` where the atom has dissolved.
pub fn run_spectrum_check(config: &ExperimentConfig, prepared: &PreparedModel) -> Result<SpectrumReport> {
    let meta = metadata(config, Experiment::SpectrumCheck);
    let model = &prepared.rank_one;
    let (lo, hi, n) = config.sweep.spectrum_grid;
    let grid = linspace(lo, hi, n);
    let im_f0 = grid
        .par_iter()
        .map(|&l| {
            model
                .f0_boundary(l)
                .map(|f| f.im)
                .map_err(|e| e.context(format!("lambda = {l}")))
        })
        .collect::<Result<Vec<_>>>()?;
    let cells: Vec<(f64, f64)> = config
        .sweep
        .kappa
        .iter()
        .flat_map(|&k| grid.iter().map(move |&l| (k, l)))
        .collect();
    let full = cells
        .par_iter()
        .map(|&(k, l)| {
            model
                .full_resolvent(k, l)
                .map_err(|e| e.context(format!("kappa = {k}, lambda = {l}")))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut table = ResultTable::new(
        "spectrum_check",
        &[
            ("kappa", Real),
            ("lambda", Real),
            ("im_f0", Real),
            ("full_resolvent", Complex),
        ],
        meta.clone(),
    );
    for (i, (&(k, l), g)) in cells.iter().zip(&full).enumerate() {
        table.push(vec![k.into(), l.into(), im_f0[i % grid.len()].into(), (*g).into()])?;
    }
    let mut summary = ResultTable::new(
        "spectrum_summary",
        &[
            ("kappa", Real),
            ("min_im_f0", Real),
            ("min_im_full", Real),
            ("at_lambda0", Complex),
        ],
        meta.clone(),
    );
    let min_im_f0 = im_f0.iter().copied().fold(f64::INFINITY, f64::min);
    for (j, &k) in config.sweep.kappa.iter().enumerate() {
        let block = &full[j * grid.len()..(j + 1) * grid.len()];
        let min_full = grid
            .iter()
            .zip(block)
            .filter(|(l, _)| **l != model.lambda0())
            .map(|(_, g)| g.im)
            .fold(f64::INFINITY, f64::min);
        let at = model
            .full_resolvent(k, model.lambda0())
            .map_err(|e| e.context(format!("kappa = {k}, lambda = {}", model.lambda0())))?;
        summary.push(vec![k.into(), min_im_f0.into(), min_full.into(), at.into()])?;
    }
    let mut tables = vec![summary, table];
    if let Some(assembled) = &prepared.assembled {
        let (wlo, whi) = config.window();
        let mut density = ResultTable::new(
            "background_density",
            &[("lambda", Real), ("density", Real)],
            meta,
        );
        for (l, d) in assembled.background_samples(wlo, whi, 400) {
            density.push(vec![l.into(), d.into()])?;
        }
        tables.push(density);
    }
    let violation = (!(min_im_f0 > 0.0)).then(|| {
        let at = grid[im_f0.iter().position(|v| !(*v > 0.0)).unwrap_or(0)];
        format!("Im F0(lambda + i0) is not positive: minimum {min_im_f0:e}, first at lambda = {at}")
    });
    Ok(SpectrumReport {
        tables,
        min_im_f0,
        violation,
    })
}

/// Prepares the model, runs one experiment inside the worker pool and writes
/// every table to `out`. Returns the written CSV paths.
pub fn run_experiment(
    experiment: Experiment,
    config: &ExperimentConfig,
    out: &Path,
    options: RunOptions,
) -> Result<Vec<PathBuf>> {
    let (tables, violation) = with_pool(options, || -> Result<_> {
        let prepared = config.prepare()?;
        Ok(match experiment {
            Experiment::Decay => (run_decay(config, &prepared)?, None),
            Experiment::Scaling => (run_scaling(config, &prepared)?, None),
            Experiment::Sojourn => (run_sojourn(config, &prepared)?, None),
            Experiment::Concentration => (run_concentration(config, &prepared)?, None),
            Experiment::SpectrumCheck => {
                let r = run_spectrum_check(config, &prepared)?;
                (r.tables, r.violation)
            }
        })
    })??;
    let written = write_tables(&tables, out, config.output.precision)?;
    match violation {
        Some(msg) => Err(Error::Hypothesis(msg)),
        None => Ok(written),
    }
}

pub fn write_tables(tables: &[ResultTable], out: &Path, precision: usize) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    tables
        .iter()
        .map(|t| {
            let path = out.join(format!("{}.csv", t.name));
            emit_csv(t, &path, precision).map(|_| path)
        })
        .collect()
}
