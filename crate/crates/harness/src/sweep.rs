//! Seeded Monte Carlo over a `(d, N)` grid.
//!
//! Trial `t` of cell `c` draws from the stream `(seed, c, t)`, so any trial
//! can be replayed alone and growing `trials` never changes earlier trials.
//! The ensemble for a cell comes from the reserved trial index `u32::MAX`.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use pqsi_core::identify::{
    run_cm_pqsi, run_im_pqsi, run_uniform_baseline, theoretical_exponents_for, BudgetPolicy, Mode, RunTranscript,
};
use pqsi_core::lowerbound::{
    arm_parameters, build_prqsi_states, c_coefficient, concentration_experiment, fixed_povm_bandit_trial,
};
use pqsi_core::measure::TwoOutcomePovm;
use pqsi_core::qcore::{
    gap_profile_from_purities, sample_haar_unitary, sample_hermitian, verify_haar_moments, StateEnsemble,
};
use pqsi_core::stream::StreamKey;
use rayon::prelude::*;

use crate::config::{Experiment, ExperimentConfig};
use crate::stats::wilson_interval;
use crate::HarnessError;

pub const SCHEMA_VERSION: u32 = 1;
pub const CSV_COLUMNS: [&str; 14] = [
    "experiment",
    "d",
    "K",
    "N",
    "m",
    "trials",
    "successes",
    "empirical_error",
    "wilson_low",
    "wilson_high",
    "theory_value",
    "theory_kind",
    "mean_copies",
    "seed",
];

/// Confidence level of the interval columns.
pub const WILSON_CONFIDENCE: f64 = 0.95;

/// Trial index reserved for drawing a cell's ensemble.
const ENSEMBLE_TRIAL: u32 = u32::MAX;

/// Standard errors a Monte Carlo moment may sit from its closed form in
/// `moment_check`.
const MOMENT_SE_TOLERANCE: f64 = 4.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrialOutcome {
    pub correct: bool,
    /// Copies consumed, when the experiment tracks them.
    pub copies: Option<u64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub experiment: Experiment,
    pub cell: u32,
    pub d: usize,
    pub k: Option<usize>,
    pub n: Option<u64>,
    pub m: Option<usize>,
    pub trials: u64,
    pub successes: u64,
    pub empirical_error: f64,
    pub wilson_low: f64,
    pub wilson_high: f64,
    pub theory_value: f64,
    pub theory_kind: &'static str,
    pub mean_copies: Option<f64>,
    pub seed: u64,
    pub wallclock_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn float(x: f64) -> String {
    format!("{x:.16e}")
}

impl SweepResult {
    /// Result file contents: a schema comment, the header, one row per cell.
    pub fn to_csv(&self) -> Result<String, HarnessError> {
        let mut out = format!("# schema_version={SCHEMA_VERSION}\n");
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(CSV_COLUMNS)?;
        for r in &self.rows {
            w.write_record([
                r.experiment.name().to_string(),
                r.d.to_string(),
                opt(r.k),
                opt(r.n),
                opt(r.m),
                r.trials.to_string(),
                r.successes.to_string(),
                float(r.empirical_error),
                float(r.wilson_low),
                float(r.wilson_high),
                float(r.theory_value),
                r.theory_kind.to_string(),
                r.mean_copies.map(float).unwrap_or_default(),
                r.seed.to_string(),
            ])?;
        }
        let body = w.into_inner().map_err(|e| HarnessError::Domain(e.to_string()))?;
        out.push_str(&String::from_utf8(body).expect("csv output is ASCII"));
        Ok(out)
    }

    /// Timing sidecar contents.
    pub fn timing_csv(&self) -> String {
        let mut out = String::from("cell,experiment,d,N,wallclock_ms\n");
        for r in &self.rows {
            writeln!(out, "{},{},{},{},{:.3}", r.cell, r.experiment.name(), r.d, opt(r.n), r.wallclock_ms).unwrap();
        }
        out
    }

    /// Writes the result CSV to `path` and the timings next to it.
    pub fn write(&self, path: &Path) -> Result<(), HarnessError> {
        let write = |p: &Path, text: &str| {
            std::fs::write(p, text).map_err(|source| HarnessError::Io { path: p.to_path_buf(), source })
        };
        write(path, &self.to_csv()?)?;
        write(&timing_path(path), &self.timing_csv())
    }
}

/// `<output>.timing.csv`.
pub fn timing_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".timing.csv");
    PathBuf::from(s)
}

/// One grid cell: its id, dimension and (for identification runs) budget.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Cell {
    pub id: u32,
    pub d: usize,
    pub n: Option<u64>,
}

/// Cells in output order: dimension-major, then budget.
pub fn cells(cfg: &ExperimentConfig) -> Result<Vec<Cell>, HarnessError> {
    let dims = cfg.grid_dims()?;
    let mut out = Vec::new();
    for (di, &d) in dims.iter().enumerate() {
        if cfg.experiment.uses_budgets() {
            for (ni, &n) in cfg.budgets.iter().enumerate() {
                out.push(Cell { id: (di * cfg.budgets.len() + ni) as u32, d, n: Some(n) });
            }
        } else {
            out.push(Cell { id: di as u32, d, n: None });
        }
    }
    Ok(out)
}

fn policy(cfg: &ExperimentConfig) -> BudgetPolicy {
    if cfg.strict_budget {
        BudgetPolicy::Strict
    } else {
        BudgetPolicy::AllowOvershoot
    }
}

fn copies_per_basis(cfg: &ExperimentConfig, d: usize) -> Result<Option<usize>, HarnessError> {
    let incoherent = match cfg.experiment {
        Experiment::ImSweep => true,
        Experiment::BaselineSweep => cfg.mode == Mode::Incoherent,
        _ => false,
    };
    if !incoherent {
        return Ok(None);
    }
    Ok(Some(cfg.m_policy.resolve(d)?.0))
}

/// Effect used by the lower-bound runs: projector of rank `povm_rank`
/// (default `d/2`) onto the first basis vectors.
pub fn lowerbound_povm(cfg: &ExperimentConfig, d: usize) -> Result<TwoOutcomePovm, HarnessError> {
    Ok(TwoOutcomePovm::basis_projector(d, cfg.povm_rank.unwrap_or(d / 2))?)
}

/// Stream key of trial `trial` in `cell`.
pub fn trial_key(cfg: &ExperimentConfig, cell: u32, trial: u32) -> StreamKey {
    StreamKey::new(cfg.seed).with_cell(cell).with_trial(trial)
}

/// The ensemble an identification cell runs on.
pub fn cell_ensemble(cfg: &ExperimentConfig, cell: Cell) -> Result<StateEnsemble, HarnessError> {
    cfg.ensemble_at(cell.d, trial_key(cfg, cell.id, ENSEMBLE_TRIAL))
}

/// Full transcript of one identification trial.
pub fn identification_transcript(
    cfg: &ExperimentConfig,
    ens: &StateEnsemble,
    cell: Cell,
    trial: u32,
) -> Result<RunTranscript, HarnessError> {
    let key = trial_key(cfg, cell.id, trial);
    let n = cell.n.ok_or_else(|| HarnessError::Domain("identification cell without a budget".into()))?;
    let m = copies_per_basis(cfg, cell.d)?;
    let t = match cfg.experiment {
        Experiment::ImSweep => run_im_pqsi(ens, n, m.unwrap_or(2), key, policy(cfg))?,
        Experiment::CmSweep => run_cm_pqsi(ens, n, key, policy(cfg))?,
        Experiment::BaselineSweep => run_uniform_baseline(ens, n, cfg.mode, m.unwrap_or(2), key)?,
        other => return Err(HarnessError::Domain(format!("{} does not produce transcripts", other.name()))),
    };
    Ok(t)
}

fn lowerbound_trial(
    cfg: &ExperimentConfig,
    zs: &[f64],
    povm: &TwoOutcomePovm,
    cell: Cell,
    trial: u32,
) -> Result<TrialOutcome, HarnessError> {
    let mut rng = trial_key(cfg, cell.id, trial).rng();
    let u = sample_haar_unitary(cell.d, &mut rng)?;
    let inst = build_prqsi_states(zs, cell.d, &u)?;
    let n = cell.n.unwrap_or_default();
    let selected = fixed_povm_bandit_trial(&inst, povm, n, cfg.allocator, &mut rng)?;
    Ok(TrialOutcome { correct: selected == inst.best_index(), copies: None })
}

fn moment_trial(cfg: &ExperimentConfig, cell: Cell, trial: u32) -> Result<TrialOutcome, HarnessError> {
    let mut rng = trial_key(cfg, cell.id, trial).rng();
    let a = sample_hermitian(cell.d, &mut rng)?;
    let b = sample_hermitian(cell.d, &mut rng)?;
    let c = sample_hermitian(cell.d, &mut rng)?;
    let rep = verify_haar_moments(&a, &b, &c, cfg.samples, &mut rng)?;
    let ok = [rep.first, rep.second, rep.third].iter().all(|m| m.within(MOMENT_SE_TOLERANCE));
    Ok(TrialOutcome { correct: ok, copies: None })
}

fn run_parallel<F>(pool: &rayon::ThreadPool, trials: u32, f: F) -> Result<Vec<TrialOutcome>, HarnessError>
where
    F: Fn(u32) -> Result<TrialOutcome, HarnessError> + Sync,
{
    pool.install(|| (0..trials).into_par_iter().map(&f).collect())
}

/// Per-trial outcomes of one cell, in trial order. Not available for
/// `concentration`, whose draws form a single stream per cell.
pub fn cell_outcomes(
    cfg: &ExperimentConfig,
    cell: Cell,
    pool: &rayon::ThreadPool,
) -> Result<Vec<TrialOutcome>, HarnessError> {
    match cfg.experiment {
        Experiment::ImSweep | Experiment::CmSweep | Experiment::BaselineSweep => {
            let ens = cell_ensemble(cfg, cell)?;
            let best = ens.best_index();
            run_parallel(pool, cfg.trials, |t| {
                let tr = identification_transcript(cfg, &ens, cell, t)?;
                Ok(TrialOutcome { correct: tr.selected == best, copies: Some(tr.copies_consumed) })
            })
        }
        Experiment::LowerboundSweep => {
            let zs = cfg.purities().ok_or_else(|| HarnessError::Domain("missing purities".into()))?;
            let povm = lowerbound_povm(cfg, cell.d)?;
            run_parallel(pool, cfg.trials, |t| lowerbound_trial(cfg, &zs, &povm, cell, t))
        }
        Experiment::MomentCheck => run_parallel(pool, cfg.trials, |t| moment_trial(cfg, cell, t)),
        Experiment::Concentration => Err(HarnessError::Domain("concentration draws are not split into trials".into())),
    }
}

/// Theory column for an identification cell, computed from the cell
/// parameters and the purity list alone.
pub fn theory_for(experiment: Experiment, mode: Mode, purities: &[f64], d: usize, n: u64) -> (f64, &'static str) {
    let gaps = gap_profile_from_purities(purities);
    let h1 = gaps.h1;
    let report = theoretical_exponents_for(gaps, d, n);
    let coherent = match experiment {
        Experiment::CmSweep => true,
        Experiment::BaselineSweep => mode == Mode::Coherent,
        Experiment::LowerboundSweep => return (n as f64 * h1 / d as f64, "lowerbound_exponent_unconstanted"),
        _ => false,
    };
    if coherent {
        (report.cm_envelope, "cm_envelope")
    } else {
        (report.im_exponent, "im_exponent_unconstanted")
    }
}

/// Highest out-of-window rate the concentration lemma allows.
pub const CONCENTRATION_MISS_CEILING: f64 = 0.25;

fn finish_row(
    cfg: &ExperimentConfig,
    cell: Cell,
    outcomes: &[TrialOutcome],
    theory: (f64, &'static str),
    k: Option<usize>,
    m: Option<usize>,
    started: Instant,
) -> Result<SweepRow, HarnessError> {
    let trials = outcomes.len() as u64;
    let successes = outcomes.iter().filter(|o| o.correct).count() as u64;
    let errors = trials - successes;
    let (wilson_low, wilson_high) = wilson_interval(errors, trials, WILSON_CONFIDENCE)?;
    let copies: Option<Vec<u64>> = outcomes.iter().map(|o| o.copies).collect();
    let mean_copies = copies.map(|c| c.iter().sum::<u64>() as f64 / trials as f64);
    Ok(SweepRow {
        experiment: cfg.experiment,
        cell: cell.id,
        d: cell.d,
        k,
        n: cell.n,
        m,
        trials,
        successes,
        empirical_error: errors as f64 / trials as f64,
        wilson_low,
        wilson_high,
        theory_value: theory.0,
        theory_kind: theory.1,
        mean_copies,
        seed: cfg.seed,
        wallclock_ms: started.elapsed().as_secs_f64() * 1e3,
    })
}

fn run_cell(cfg: &ExperimentConfig, cell: Cell, pool: &rayon::ThreadPool) -> Result<SweepRow, HarnessError> {
    let started = Instant::now();
    match cfg.experiment {
        Experiment::Concentration => {
            let povm = lowerbound_povm(cfg, cell.d)?;
            let mut rng = trial_key(cfg, cell.id, 0).rng();
            let rep = concentration_experiment(&povm, cfg.alpha, cfg.trials as usize, &mut rng)?;
            let inside = (rep.in_window_fraction * rep.trials as f64).round() as u64;
            let outcomes: Vec<TrialOutcome> =
                (0..rep.trials as u64).map(|i| TrialOutcome { correct: i < inside, copies: None }).collect();
            finish_row(
                cfg,
                cell,
                &outcomes,
                (CONCENTRATION_MISS_CEILING, "concentration_miss_ceiling"),
                None,
                None,
                started,
            )
        }
        Experiment::MomentCheck => {
            let outcomes = cell_outcomes(cfg, cell, pool)?;
            finish_row(cfg, cell, &outcomes, (0.0, "moment_failure_target"), None, None, started)
        }
        Experiment::LowerboundSweep => {
            let zs = cfg.purities().ok_or_else(|| HarnessError::Domain("missing purities".into()))?;
            let outcomes = cell_outcomes(cfg, cell, pool)?;
            let theory = theory_for(cfg.experiment, cfg.mode, &zs, cell.d, cell.n.unwrap_or_default());
            finish_row(cfg, cell, &outcomes, theory, Some(zs.len()), None, started)
        }
        _ => {
            let ens = cell_ensemble(cfg, cell)?;
            let zs = cfg.purities().unwrap_or_else(|| ens.purities().to_vec());
            let outcomes = cell_outcomes(cfg, cell, pool)?;
            let theory = theory_for(cfg.experiment, cfg.mode, &zs, cell.d, cell.n.unwrap_or_default());
            finish_row(cfg, cell, &outcomes, theory, Some(ens.len()), copies_per_basis(cfg, cell.d)?, started)
        }
    }
}

pub fn thread_pool(workers: usize) -> Result<rayon::ThreadPool, HarnessError> {
    Ok(rayon::ThreadPoolBuilder::new().num_threads(workers.max(1)).build()?)
}

/// Runs every cell of the grid. Rows come out in cell order whatever the
/// worker count.
pub fn run_sweep(cfg: &ExperimentConfig) -> Result<SweepResult, HarnessError> {
    let pool = thread_pool(cfg.workers)?;
    let rows = cells(cfg)?.into_iter().map(|c| run_cell(cfg, c, &pool)).collect::<Result<_, _>>()?;
    Ok(SweepResult { rows })
}

/// One trial of the first cell, rendered for people.
pub fn simulate(cfg: &ExperimentConfig, trial: u32) -> Result<String, HarnessError> {
    let cell = *cells(cfg)?.first().ok_or_else(|| HarnessError::Domain("empty grid".into()))?;
    let mut out = String::new();
    match cfg.experiment {
        Experiment::ImSweep | Experiment::CmSweep | Experiment::BaselineSweep => {
            let ens = cell_ensemble(cfg, cell)?;
            let t = identification_transcript(cfg, &ens, cell, trial)?;
            writeln!(
                out,
                "# d={} K={} N={} best={} correct={}",
                cell.d,
                ens.len(),
                opt(cell.n),
                ens.best_index(),
                t.selected == ens.best_index()
            )
            .unwrap();
            out.push_str(&t.to_records());
        }
        Experiment::LowerboundSweep => {
            let zs = cfg.purities().ok_or_else(|| HarnessError::Domain("missing purities".into()))?;
            let povm = lowerbound_povm(cfg, cell.d)?;
            let mut rng = trial_key(cfg, cell.id, trial).rng();
            let u = sample_haar_unitary(cell.d, &mut rng)?;
            let inst = build_prqsi_states(&zs, cell.d, &u)?;
            let c = c_coefficient(&povm, &u)?;
            let params = arm_parameters(&inst, &povm)?;
            let selected = fixed_povm_bandit_trial(&inst, &povm, cell.n.unwrap_or_default(), cfg.allocator, &mut rng)?;
            let v = serde_json::json!({
                "d": cell.d,
                "N": cell.n,
                "trace_m": povm.trace_m(),
                "c": c,
                "alphas": inst.alphas,
                "arm_parameters": params,
                "best": inst.best_index(),
                "selected": selected,
            });
            writeln!(out, "{}", serde_json::to_string_pretty(&v)?).unwrap();
        }
        Experiment::MomentCheck => {
            let mut rng = trial_key(cfg, cell.id, trial).rng();
            let a = sample_hermitian(cell.d, &mut rng)?;
            let b = sample_hermitian(cell.d, &mut rng)?;
            let c = sample_hermitian(cell.d, &mut rng)?;
            let rep = verify_haar_moments(&a, &b, &c, cfg.samples, &mut rng)?;
            writeln!(out, "{}", serde_json::to_string_pretty(&rep)?).unwrap();
        }
        Experiment::Concentration => {
            let povm = lowerbound_povm(cfg, cell.d)?;
            let mut rng = trial_key(cfg, cell.id, 0).rng();
            let rep = concentration_experiment(&povm, cfg.alpha, cfg.trials as usize, &mut rng)?;
            writeln!(out, "{}", serde_json::to_string_pretty(&rep)?).unwrap();
        }
    }
    Ok(out)
}

/// Gap profile and bound arguments for every `(d, N)` of the grid.
pub fn exponents(cfg: &ExperimentConfig) -> Result<String, HarnessError> {
    let mut out = String::new();
    for &d in &cfg.grid_dims()? {
        let zs = match cfg.purities() {
            Some(zs) => zs,
            None => cfg.ensemble_at(d, StreamKey::new(cfg.seed))?.purities().to_vec(),
        };
        let gaps = gap_profile_from_purities(&zs);
        let deltas: Vec<String> = gaps.deltas_sorted.iter().map(|x| format!("{x:.6}")).collect();
        writeln!(
            out,
            "d={d} K={} logbar={:.6} deltas=[{}] H1={:.6} H2={:.6}",
            zs.len(),
            gaps.logbar_k,
            deltas.join(", "),
            gaps.h1,
            gaps.h2
        )
        .unwrap();
        for &n in &cfg.budgets {
            let r = theoretical_exponents_for(gaps.clone(), d, n);
            writeln!(
                out,
                "  N={n} im_exponent={:.6} im_lemma_exponent={:.6} (unconstanted) cm_exponent={:.6} cm_envelope={:.6e}",
                r.im_exponent,
                r.im_lemma_exponent(),
                r.cm_exponent,
                r.cm_envelope
            )
            .unwrap();
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(text: &str) -> ExperimentConfig {
        text.parse().unwrap()
    }

    #[test]
    fn cell_ids_are_dimension_major() {
        let c = cfg("experiment = cm_sweep\npurities = 0.9,0.6\ndims = 2,4\nbudgets = 100,200,300\ntrials = 1\n");
        let ids: Vec<(u32, usize, Option<u64>)> = cells(&c).unwrap().iter().map(|c| (c.id, c.d, c.n)).collect();
        assert_eq!(ids[0], (0, 2, Some(100)));
        assert_eq!(ids[2], (2, 2, Some(300)));
        assert_eq!(ids[3], (3, 4, Some(100)));
        assert_eq!(ids.len(), 6);
    }

    #[test]
    fn single_trial_interval_is_defined() {
        let c = cfg("experiment = cm_sweep\npurities = 0.9,0.6\ndims = 2\nbudgets = 100\ntrials = 1\n");
        let r = run_sweep(&c).unwrap();
        let row = &r.rows[0];
        assert!(row.empirical_error == 0.0 || row.empirical_error == 1.0);
        assert!(row.wilson_low <= row.empirical_error && row.empirical_error <= row.wilson_high);
    }

    #[test]
    fn csv_layout() {
        let c =
            cfg("experiment = im_sweep\npurities = 0.9,0.6\ndims = 2\nbudgets = 100\ntrials = 3\nm_policy = fixed:2\n");
        let text = run_sweep(&c).unwrap().to_csv().unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("# schema_version=1"));
        assert_eq!(lines.next(), Some(CSV_COLUMNS.join(",").as_str()));
        let row: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_eq!(row.len(), 14);
        assert_eq!(row[0], "im_sweep");
        assert_eq!(row[4], "2");
        assert_eq!(row[11], "im_exponent_unconstanted");
    }

    #[test]
    fn timing_sidecar_path() {
        assert_eq!(timing_path(Path::new("out/r.csv")), PathBuf::from("out/r.csv.timing.csv"));
    }

    #[test]
    fn concentration_row() {
        let c = cfg("experiment = concentration\ndims = 16\npovm_rank = 8\nalpha = 0.0\ntrials = 200\n");
        let r = run_sweep(&c).unwrap();
        assert_eq!(r.rows[0].successes, 200);
        assert_eq!(r.rows[0].theory_kind, "concentration_miss_ceiling");
    }
}
