//! Seeded Monte Carlo driver and the experiment registry.
//!
//! Every trial draws from its own ChaCha8 stream keyed by
//! `(seed, SNR index, trial index)`, so results do not depend on the
//! order in which trials run or on the number of worker threads. Points
//! sharing an SNR (different `K` or bit budgets) share the stream: the IA
//! drop is drawn first and the OIA users are drawn user by user, so a
//! smaller `K` sees a prefix of the same users.

pub mod config;
pub mod csv;

use std::fmt;
use std::sync::atomic::{AtomicUsize, Ordering};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

pub use config::{Experiment, ExperimentConfig, KRule};
pub use csv::{format_float, write_atomic, ExperimentOutput, ResultRow};

use crate::channel::{
    generate_channels, interference_covariance, postfilter, user_metric, user_rate, RateRecord, SystemConfig, CELLS,
};
use crate::complexity::{flop_report, FlopScheme};
use crate::error::{Error, Result};
use crate::grassmann::ManifoldParams;
use crate::ia::{closed_form_ia, ia_limited_feedback_rate, ia_sum_rate, FeedbackMode, IaDrop};
use crate::oia::{expected_eligible, outage_probability, select_conventional, select_one_bit};
use crate::threshold::{threshold, ThresholdMethod};

/// Bits at or below which IA feedback is simulated with explicit codebooks.
pub const RVQ_MAX_BITS: u32 = 24;

/// Consecutive degenerate draws after which a trial gives up.
pub const MAX_REDRAWS: u32 = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scheme {
    /// Argmin over unquantized metrics.
    OiaPerfect,
    Oia1Bit,
    /// Closed-form IA with perfect channel knowledge.
    IaClosedForm,
    /// IA with individually quantized aggregated channels.
    IaIndividual,
}

impl Scheme {
    pub fn name(self) -> &'static str {
        match self {
            Scheme::OiaPerfect => "oia_perfect",
            Scheme::Oia1Bit => "oia_1bit",
            Scheme::IaClosedForm => "ia_closed_form",
            Scheme::IaIndividual => "ia_individual",
        }
    }

    fn is_oia(self) -> bool {
        matches!(self, Scheme::OiaPerfect | Scheme::Oia1Bit)
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Schemes evaluated on every drop of `experiment`, in evaluation order.
pub fn schemes(experiment: Experiment) -> &'static [Scheme] {
    match experiment {
        Experiment::Fig2SumrateD1 => &[Scheme::OiaPerfect, Scheme::Oia1Bit, Scheme::IaClosedForm],
        Experiment::Fig3EligibleUsers => &[Scheme::Oia1Bit],
        Experiment::Fig5SumrateD2 => &[Scheme::OiaPerfect, Scheme::Oia1Bit],
        Experiment::Fig6OiaVsIa => &[Scheme::Oia1Bit, Scheme::IaIndividual],
        Experiment::Fig4ThresholdCompare | Experiment::Fig7ComplexityTable => &[],
    }
}

/// One simulated operating point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    /// Position in `snr_db_grid`.
    pub snr_index: usize,
    pub snr_db: f64,
    pub k: u64,
    /// IA feedback bits per receiver (`fig6`).
    pub bits: Option<u32>,
}

impl Point {
    pub fn power(&self) -> f64 {
        10f64.powf(self.snr_db / 10.0)
    }
}

/// Monte Carlo points of `cfg` in output order. Empty for the analytic
/// experiments.
pub fn points(cfg: &ExperimentConfig) -> Result<Vec<Point>> {
    let mut out = Vec::new();
    for (snr_index, &snr_db) in cfg.snr_db_grid.iter().enumerate() {
        let p = 10f64.powf(snr_db / 10.0);
        match cfg.experiment {
            Experiment::Fig2SumrateD1 | Experiment::Fig3EligibleUsers => {
                out.push(Point { snr_index, snr_db, k: cfg.k_rule.users(p), bits: None })
            }
            Experiment::Fig5SumrateD2 => out.extend(cfg.k_grid.iter().map(|&k| Point { snr_index, snr_db, k, bits: None })),
            Experiment::Fig6OiaVsIa => {
                out.extend(cfg.bits_grid.iter().map(|&b| Point { snr_index, snr_db, k: b.into(), bits: Some(b) }))
            }
            Experiment::Fig4ThresholdCompare | Experiment::Fig7ComplexityTable => return Ok(Vec::new()),
        }
    }
    if let Some(pt) = out.iter().find(|pt| pt.k > config::MAX_USERS) {
        return Err(Error::Config(format!("K = {} exceeds the limit of {}", pt.k, config::MAX_USERS)));
    }
    Ok(out)
}

/// Outcome of one scheme on one drop.
#[derive(Debug, Clone, PartialEq)]
pub struct SchemeTrial {
    pub scheme: Scheme,
    pub sum_rate: f64,
    /// Served user per cell (OIA schemes only).
    pub records: Vec<RateRecord>,
    /// Users reporting '1' per cell (1-bit OIA only).
    pub eligible: Option<[usize; CELLS]>,
}

impl SchemeTrial {
    pub fn outage_cells(&self) -> usize {
        self.records.iter().filter(|r| r.outage).count()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub point: usize,
    pub trial: u64,
    /// Degenerate draws discarded before this one.
    pub redraws: u32,
    pub schemes: Vec<SchemeTrial>,
}

impl TrialRecord {
    pub fn scheme(&self, s: Scheme) -> Option<&SchemeTrial> {
        self.schemes.iter().find(|t| t.scheme == s)
    }
}

/// The rng of trial `trial` at the SNR with index `snr_index`.
pub fn trial_rng(seed: u64, snr_index: usize, trial: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&(snr_index as u64).to_le_bytes());
    key[16..24].copy_from_slice(&trial.to_le_bytes());
    ChaCha8Rng::from_seed(key)
}

#[derive(Debug, Clone)]
struct PointPlan {
    point: Point,
    system: SystemConfig,
    threshold: Option<f64>,
    schemes: &'static [Scheme],
}

fn plan(cfg: &ExperimentConfig, point: Point) -> Result<PointPlan> {
    let k = usize::try_from(point.k).map_err(|_| Error::Config(format!("K = {} too large", point.k)))?;
    let system = SystemConfig::new(cfg.d, k, point.power())?;
    let schemes = schemes(cfg.experiment);
    let threshold = if schemes.contains(&Scheme::Oia1Bit) {
        let params = ManifoldParams::new(cfg.nr, cfg.d)?;
        Some(threshold(cfg.threshold_method, point.k, &params)?.x)
    } else {
        None
    };
    Ok(PointPlan { point, system, threshold, schemes })
}

/// One drop at point `point` of `cfg`, with every scheme of the experiment
/// evaluated on it.
pub fn run_trial(cfg: &ExperimentConfig, point: usize, trial: u64) -> Result<TrialRecord> {
    cfg.validate()?;
    let pts = points(cfg)?;
    let pt = *pts.get(point).ok_or_else(|| Error::Config(format!("point {point} out of range ({})", pts.len())))?;
    run_planned(cfg.seed, &plan(cfg, pt)?, point, trial)
}

fn run_planned(seed: u64, plan: &PointPlan, point: usize, trial: u64) -> Result<TrialRecord> {
    let mut rng = trial_rng(seed, plan.point.snr_index, trial);
    let mut redraws = 0;
    loop {
        match draw(plan, &mut rng) {
            Ok(schemes) => return Ok(TrialRecord { point, trial, redraws, schemes }),
            Err(Error::DegenerateChannel) if redraws < MAX_REDRAWS => redraws += 1,
            Err(e) => return Err(e),
        }
    }
}

fn serve(ch: &crate::channel::ChannelSet, sys: &SystemConfig, i: usize, k: usize) -> Result<RateRecord> {
    let u = postfilter(&interference_covariance(ch, i, k), sys.d);
    user_rate(ch, i, k, &u, sys)
}

fn draw(plan: &PointPlan, rng: &mut ChaCha8Rng) -> Result<Vec<SchemeTrial>> {
    let sys = &plan.system;
    let mut out = Vec::with_capacity(plan.schemes.len());

    let drop = plan
        .schemes
        .iter()
        .any(|s| !s.is_oia())
        .then(|| IaDrop::generate(rng, 2, 2));

    let metrics = if plan.schemes.iter().any(|s| s.is_oia()) {
        let ch = generate_channels(rng, sys);
        let metrics = (0..CELLS)
            .map(|i| (0..sys.k).map(|k| user_metric(&ch, i, k)).collect::<Result<Vec<f64>>>())
            .collect::<Result<Vec<_>>>()?;
        Some((ch, metrics))
    } else {
        None
    };

    for &scheme in plan.schemes {
        let trial = match scheme {
            Scheme::OiaPerfect | Scheme::Oia1Bit => {
                let (ch, metrics) = metrics.as_ref().expect("channels drawn for OIA");
                let mut records = Vec::with_capacity(CELLS);
                let mut eligible = [0; CELLS];
                for (i, m) in metrics.iter().enumerate() {
                    let (k, outage) = if scheme == Scheme::OiaPerfect {
                        (select_conventional(m), false)
                    } else {
                        let sel = select_one_bit(m, plan.threshold.expect("threshold planned"), rng);
                        eligible[i] = sel.eligible_count;
                        (sel.selected, sel.outage)
                    };
                    records.push(RateRecord { outage, ..serve(ch, sys, i, k)? });
                }
                SchemeTrial {
                    scheme,
                    sum_rate: records.iter().map(|r| r.rate).sum(),
                    records,
                    eligible: (scheme == Scheme::Oia1Bit).then_some(eligible),
                }
            }
            Scheme::IaClosedForm | Scheme::IaIndividual => {
                let drop = drop.as_ref().expect("IA drop drawn");
                let sum_rate = if scheme == Scheme::IaClosedForm {
                    ia_sum_rate(drop, &closed_form_ia(drop)?, sys.p)
                } else {
                    let bits = plan.point.bits.ok_or_else(|| Error::Config("IA feedback needs a bit budget".into()))?;
                    let mode = if bits <= RVQ_MAX_BITS { FeedbackMode::Rvq } else { FeedbackMode::Perturbation };
                    ia_limited_feedback_rate(drop, bits, mode, sys.p, rng)?
                };
                SchemeTrial { scheme, sum_rate, records: Vec::new(), eligible: None }
            }
        };
        out.push(trial);
    }
    Ok(out)
}

fn mean_stderr(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    if v.len() < 2 {
        return (mean, 0.0);
    }
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

fn summarize(cfg: &ExperimentConfig, plan: &PointTrials) -> Result<Vec<ResultRow>> {
    let trials = &plan.trials;
    let row = |scheme: &str| ResultRow {
        experiment: cfg.experiment.name().to_string(),
        snr_db: Some(plan.point.snr_db),
        k: Some(plan.point.k),
        scheme: scheme.to_string(),
        mean_sum_rate: None,
        stderr: None,
        outage_rate: None,
        mean_eligible: None,
        threshold_used: None,
        trials: Some(trials.len()),
    };
    let mut rows = Vec::new();
    for &scheme in schemes(cfg.experiment) {
        let runs: Vec<&SchemeTrial> = trials.iter().filter_map(|t| t.scheme(scheme)).collect();
        let rates: Vec<f64> = runs.iter().map(|r| r.sum_rate).collect();
        let (mean, se) = mean_stderr(&rates);
        let mut r = ResultRow { mean_sum_rate: Some(mean), stderr: Some(se), ..row(scheme.name()) };
        if scheme == Scheme::Oia1Bit {
            let cells = (CELLS * runs.len()) as f64;
            r.outage_rate = Some(runs.iter().map(|t| t.outage_cells()).sum::<usize>() as f64 / cells);
            r.mean_eligible =
                Some(runs.iter().flat_map(|t| t.eligible.unwrap_or_default()).sum::<usize>() as f64 / cells);
            r.threshold_used = plan.threshold;
        }
        rows.push(r);
    }
    if cfg.experiment == Experiment::Fig3EligibleUsers {
        let params = ManifoldParams::new(cfg.nr, cfg.d)?;
        let x = plan.threshold.expect("threshold planned");
        rows.push(ResultRow {
            outage_rate: Some(outage_probability(x, plan.point.k, &params)),
            mean_eligible: Some(expected_eligible(x, plan.point.k, &params)),
            threshold_used: Some(x),
            trials: None,
            ..row("oia_1bit_analytic")
        });
    }
    Ok(rows)
}

fn threshold_table(cfg: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    let params = ManifoldParams::new(cfg.nr, cfg.d)?;
    let mut rows = Vec::new();
    for &k in &cfg.k_grid {
        for method in [ThresholdMethod::Numeric, ThresholdMethod::Lambert, ThresholdMethod::Asymptotic] {
            let x = match threshold(method, k, &params) {
                Ok(spec) => Some(spec.x),
                Err(Error::TooFewUsers { .. } | Error::LambertDomain { .. }) => None,
                Err(e) => return Err(e),
            };
            rows.push(ResultRow {
                experiment: cfg.experiment.name().to_string(),
                snr_db: None,
                k: Some(k),
                scheme: method.name().to_string(),
                mean_sum_rate: None,
                stderr: None,
                outage_rate: None,
                mean_eligible: None,
                threshold_used: x,
                trials: None,
            });
        }
    }
    Ok(rows)
}

fn complexity_table(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    let mut reports = Vec::new();
    for &bits in &cfg.bits_grid {
        for scheme in FlopScheme::ALL {
            let (nr, second) = match scheme {
                FlopScheme::Oia1Bit => (cfg.nr as u64, cfg.d as u64),
                FlopScheme::IaJoint | FlopScheme::IaIndividual => (2, 2),
            };
            reports.push(flop_report(scheme, nr, second, bits)?);
        }
    }
    Ok(ExperimentOutput::Flops { experiment: cfg.experiment.name().to_string(), reports })
}

/// Runs every trial of every point and aggregates in point order.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    run_experiment_with(cfg, false)
}

/// Trials of one Monte Carlo point, in trial order.
#[derive(Debug, Clone, PartialEq)]
pub struct PointTrials {
    pub point: Point,
    pub threshold: Option<f64>,
    pub trials: Vec<TrialRecord>,
}

/// Runs every trial of every Monte Carlo point of `cfg`. Empty for the
/// analytic experiments.
pub fn run_trials(cfg: &ExperimentConfig, progress: bool) -> Result<Vec<PointTrials>> {
    cfg.validate()?;
    let plans = points(cfg)?.into_iter().map(|pt| plan(cfg, pt)).collect::<Result<Vec<_>>>()?;
    let work: Vec<(usize, u64)> =
        (0..plans.len()).flat_map(|p| (0..cfg.trials as u64).map(move |t| (p, t))).collect();
    let total = work.len();
    let done = AtomicUsize::new(0);
    let step = (total / 100).max(1);

    let records = work
        .par_iter()
        .map(|&(p, t)| {
            let r = run_planned(cfg.seed, &plans[p], p, t);
            let n = done.fetch_add(1, Ordering::Relaxed) + 1;
            if progress && (n.is_multiple_of(step) || n == total) {
                eprint!("\r{}: {n}/{total} trials", cfg.experiment);
            }
            r
        })
        .collect::<Result<Vec<TrialRecord>>>()?;
    if progress && total > 0 {
        eprintln!();
    }

    let mut out = Vec::with_capacity(plans.len());
    let mut records = records.into_iter();
    for (p, plan) in plans.into_iter().enumerate() {
        let trials: Vec<TrialRecord> = records.by_ref().take(cfg.trials).collect();
        let redraws: u64 = trials.iter().map(|t| u64::from(t.redraws)).sum();
        if redraws as f64 > 1e-3 * cfg.trials as f64 {
            eprintln!(
                "warning: {}: point {p} (snr {} dB, K {}) needed {redraws} redraws over {} trials",
                cfg.experiment, plan.point.snr_db, plan.point.k, cfg.trials
            );
        }
        out.push(PointTrials { point: plan.point, threshold: plan.threshold, trials });
    }
    Ok(out)
}

/// As [`run_experiment`], optionally printing a progress line to stderr.
pub fn run_experiment_with(cfg: &ExperimentConfig, progress: bool) -> Result<ExperimentOutput> {
    cfg.validate()?;
    match cfg.experiment {
        Experiment::Fig4ThresholdCompare => return Ok(ExperimentOutput::Results(threshold_table(cfg)?)),
        Experiment::Fig7ComplexityTable => return complexity_table(cfg),
        _ => {}
    }
    let mut rows = Vec::new();
    for pt in run_trials(cfg, progress)? {
        rows.extend(summarize(cfg, &pt)?);
    }
    Ok(ExperimentOutput::Results(rows))
}

/// Runs `cfg` and writes the CSV to `cfg.output_path` when set. Returns
/// the CSV text.
pub fn run_to_csv(cfg: &ExperimentConfig, progress: bool) -> Result<String> {
    let output = run_experiment_with(cfg, progress)?;
    let comment = format!("experiment={} seed={} trials={}", cfg.experiment, cfg.seed, cfg.trials);
    let text = output.to_csv(&comment);
    if let Some(path) = &cfg.output_path {
        write_atomic(path, &text)?;
    }
    Ok(text)
}
