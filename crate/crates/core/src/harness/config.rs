//! Experiment configuration and its flat `key = value` text format.
//!
//! ```text
//! # comments and blank lines are ignored
//! experiment = fig2_sumrate_d1
//! snr_db_grid = 0, 5, 10, 15, 20
//! K_rule = ceil_P
//! trials = 500
//! seed = 7
//! ```
//!
//! Keys are the field names of [`ExperimentConfig`]; unspecified keys keep
//! the experiment's defaults and unknown keys are rejected.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::threshold::ThresholdMethod;

/// Users above this count per cell are refused (memory guard).
pub const MAX_USERS: u64 = 10_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Experiment {
    Fig2SumrateD1,
    Fig3EligibleUsers,
    Fig4ThresholdCompare,
    Fig5SumrateD2,
    Fig6OiaVsIa,
    Fig7ComplexityTable,
}

impl Experiment {
    pub const ALL: [Experiment; 6] = [
        Self::Fig2SumrateD1,
        Self::Fig3EligibleUsers,
        Self::Fig4ThresholdCompare,
        Self::Fig5SumrateD2,
        Self::Fig6OiaVsIa,
        Self::Fig7ComplexityTable,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::Fig2SumrateD1 => "fig2_sumrate_d1",
            Self::Fig3EligibleUsers => "fig3_eligible_users",
            Self::Fig4ThresholdCompare => "fig4_threshold_compare",
            Self::Fig5SumrateD2 => "fig5_sumrate_d2",
            Self::Fig6OiaVsIa => "fig6_oia_vs_ia",
            Self::Fig7ComplexityTable => "fig7_complexity_table",
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            Self::Fig2SumrateD1 => "sum rate vs SNR, d=1, K=ceil(P): perfect vs 1-bit OIA vs closed-form IA",
            Self::Fig3EligibleUsers => "mean number of users reporting '1', d=1, K=ceil(P)",
            Self::Fig4ThresholdCompare => "numeric vs Lambert vs asymptotic threshold over K, d=2",
            Self::Fig5SumrateD2 => "sum rate vs SNR, d=2, fixed K in {10,50,100}",
            Self::Fig6OiaVsIa => "1-bit OIA (K = bits) vs IA with individual quantization over SNR x bits",
            Self::Fig7ComplexityTable => "FLOPs per cell of OIA and IA quantization vs feedback bits",
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Experiment {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL.into_iter().find(|e| e.name() == s).ok_or_else(|| Error::UnknownExperiment(s.to_string()))
    }
}

/// How the number of users per cell follows the transmit power.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KRule {
    Fixed(u64),
    /// `K = ⌈P⌉`
    CeilP,
    /// `K = ⌈P^e⌉`
    CeilPPow(u32),
}

impl KRule {
    pub fn users(self, p: f64) -> u64 {
        // Shave rounding noise so that 10^(30/10) maps to exactly 1000.
        let ceil = |v: f64| (v * (1.0 - 1e-12)).ceil().max(1.0) as u64;
        match self {
            KRule::Fixed(k) => k,
            KRule::CeilP => ceil(p),
            KRule::CeilPPow(e) => ceil(p.powi(e as i32)),
        }
    }
}

impl fmt::Display for KRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KRule::Fixed(k) => write!(f, "fixed({k})"),
            KRule::CeilP => f.write_str("ceil_P"),
            KRule::CeilPPow(e) => write!(f, "ceil_P_pow({e})"),
        }
    }
}

impl FromStr for KRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Config(format!("bad K_rule `{s}` (expected fixed(K), ceil_P or ceil_P_pow(e))"));
        let s = s.trim();
        if s == "ceil_P" {
            return Ok(KRule::CeilP);
        }
        let arg = |prefix: &str| s.strip_prefix(prefix).and_then(|r| r.strip_suffix(')')).map(str::trim);
        if let Some(a) = arg("fixed(") {
            return a.parse().map(KRule::Fixed).map_err(|_| bad());
        }
        if let Some(a) = arg("ceil_P_pow(") {
            return a.parse().map(KRule::CeilPPow).map_err(|_| bad());
        }
        Err(bad())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub snr_db_grid: Vec<f64>,
    pub k_rule: KRule,
    /// Explicit user counts swept by `fig4` and `fig5`.
    pub k_grid: Vec<u64>,
    /// Feedback bits per cell swept by `fig6` and `fig7`.
    pub bits_grid: Vec<u32>,
    pub d: usize,
    pub nr: usize,
    pub nt: usize,
    pub trials: usize,
    pub seed: u64,
    pub threshold_method: ThresholdMethod,
    pub output_path: Option<PathBuf>,
}

pub const KEYS: [&str; 12] = [
    "experiment",
    "snr_db_grid",
    "K_rule",
    "K_grid",
    "bits_grid",
    "d",
    "nr",
    "nt",
    "trials",
    "seed",
    "threshold_method",
    "output_path",
];

fn db_range(lo: i32, hi: i32, step: usize) -> Vec<f64> {
    (lo..=hi).step_by(step).map(f64::from).collect()
}

impl ExperimentConfig {
    /// Registered defaults of `experiment`.
    pub fn defaults(experiment: Experiment) -> Self {
        let base = Self {
            experiment,
            snr_db_grid: db_range(0, 40, 5),
            k_rule: KRule::CeilP,
            k_grid: Vec::new(),
            bits_grid: Vec::new(),
            d: 1,
            nr: 2,
            nt: 1,
            trials: 2000,
            seed: 42,
            threshold_method: ThresholdMethod::ClosedFormD1,
            output_path: None,
        };
        match experiment {
            Experiment::Fig2SumrateD1 | Experiment::Fig3EligibleUsers => base,
            Experiment::Fig4ThresholdCompare => Self {
                snr_db_grid: Vec::new(),
                k_grid: vec![10, 20, 50, 100, 200, 500, 1000, 2000, 5000, 10_000],
                d: 2,
                nr: 4,
                nt: 2,
                trials: 1,
                threshold_method: ThresholdMethod::Numeric,
                ..base
            },
            Experiment::Fig5SumrateD2 => Self {
                k_grid: vec![10, 50, 100],
                d: 2,
                nr: 4,
                nt: 2,
                trials: 500,
                threshold_method: ThresholdMethod::Lambert,
                ..base
            },
            Experiment::Fig6OiaVsIa => Self {
                snr_db_grid: db_range(0, 40, 10),
                bits_grid: (2..=40).step_by(2).collect(),
                trials: 500,
                ..base
            },
            Experiment::Fig7ComplexityTable => Self {
                snr_db_grid: Vec::new(),
                bits_grid: (2..=40).step_by(2).collect(),
                trials: 1,
                ..base
            },
        }
    }

    /// Parses a config file body. `experiment` names the registry entry
    /// whose defaults are overridden; the file may repeat it but must not
    /// contradict it. Without it, the file must set `experiment`.
    pub fn parse(text: &str, experiment: Option<Experiment>) -> Result<Self> {
        let mut pairs: Vec<(&str, &str)> = Vec::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected `key = value`", n + 1)))?;
            let (key, value) = (key.trim(), value.trim());
            if !KEYS.contains(&key) {
                return Err(Error::Config(format!("line {}: unknown key `{key}`", n + 1)));
            }
            if pairs.iter().any(|(k, _)| *k == key) {
                return Err(Error::Config(format!("line {}: duplicate key `{key}`", n + 1)));
            }
            pairs.push((key, value));
        }

        let named = pairs.iter().find(|(k, _)| *k == "experiment").map(|(_, v)| v.parse::<Experiment>()).transpose()?;
        let experiment = match (experiment, named) {
            (Some(a), Some(b)) if a != b => {
                return Err(Error::Config(format!("config is for `{b}` but `{a}` was requested")))
            }
            (Some(a), _) | (None, Some(a)) => a,
            (None, None) => return Err(Error::Config("no experiment given".into())),
        };

        let mut cfg = Self::defaults(experiment);
        for (key, value) in pairs {
            cfg.set(key, value)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn set(&mut self, key: &str, value: &str) -> Result<()> {
        fn num<T: FromStr>(key: &str, v: &str) -> Result<T> {
            v.parse().map_err(|_| Error::Config(format!("`{key}`: cannot parse `{v}`")))
        }
        fn list<T: FromStr>(key: &str, v: &str) -> Result<Vec<T>> {
            v.split(',').map(str::trim).filter(|s| !s.is_empty()).map(|s| num(key, s)).collect()
        }
        match key {
            "experiment" => {}
            "snr_db_grid" => self.snr_db_grid = list(key, value)?,
            "K_rule" => self.k_rule = value.parse()?,
            "K_grid" => self.k_grid = list(key, value)?,
            "bits_grid" => self.bits_grid = list(key, value)?,
            "d" => self.d = num(key, value)?,
            "nr" => self.nr = num(key, value)?,
            "nt" => self.nt = num(key, value)?,
            "trials" => self.trials = num(key, value)?,
            "seed" => self.seed = num(key, value)?,
            "threshold_method" => self.threshold_method = value.parse()?,
            "output_path" => self.output_path = Some(PathBuf::from(value)),
            _ => unreachable!("keys are checked against KEYS"),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        let err = |m: String| Err(Error::Config(m));
        if self.trials == 0 {
            return err("trials must be at least 1".into());
        }
        if self.d == 0 || self.nr != 2 * self.d || self.nt != self.d {
            return err(format!("need nr = 2d and nt = d (got d={}, nr={}, nt={})", self.d, self.nr, self.nt));
        }
        if self.snr_db_grid.iter().any(|s| !s.is_finite()) {
            return err("snr_db_grid must be finite".into());
        }
        if let KRule::CeilPPow(e) = self.k_rule {
            if e == 0 || e as usize > self.d * self.d {
                return err(format!("ceil_P_pow exponent must be d*d' with 0 < d' <= d, got {e}"));
            }
        }
        if self.k_grid.contains(&0) || matches!(self.k_rule, KRule::Fixed(0)) {
            return err("K must be at least 1".into());
        }
        let needs_snr = !matches!(self.experiment, Experiment::Fig4ThresholdCompare | Experiment::Fig7ComplexityTable);
        if needs_snr && self.snr_db_grid.is_empty() {
            return err("snr_db_grid must not be empty".into());
        }
        match self.experiment {
            Experiment::Fig4ThresholdCompare | Experiment::Fig5SumrateD2 if self.k_grid.is_empty() => {
                err("K_grid must not be empty".into())
            }
            Experiment::Fig6OiaVsIa | Experiment::Fig7ComplexityTable if self.bits_grid.is_empty() => {
                err("bits_grid must not be empty".into())
            }
            Experiment::Fig6OiaVsIa if self.bits_grid.iter().any(|b| b % 2 != 0 || *b == 0) => {
                err("fig6 bits must be even and positive (split across two vectors)".into())
            }
            Experiment::Fig6OiaVsIa if self.d != 1 => err("fig6 compares single-stream links (d = 1)".into()),
            _ => Ok(()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn k_rules() {
        assert_eq!(KRule::CeilP.users(10f64.powf(3.0)), 1000);
        assert_eq!(KRule::CeilP.users(1.0), 1);
        assert_eq!(KRule::CeilP.users(10f64.powf(0.5)), 4);
        assert_eq!(KRule::CeilPPow(2).users(10.0), 100);
        assert_eq!(KRule::Fixed(7).users(1e9), 7);
        for r in [KRule::CeilP, KRule::Fixed(12), KRule::CeilPPow(4)] {
            assert_eq!(r.to_string().parse::<KRule>().unwrap(), r);
        }
        assert!("fixed(x)".parse::<KRule>().is_err());
        assert!("ceil".parse::<KRule>().is_err());
    }

    #[test]
    fn parse_overrides_defaults() {
        let cfg = ExperimentConfig::parse(
            "# test\nexperiment = fig2_sumrate_d1\nsnr_db_grid = 0, 10\ntrials = 7 # few\nseed=9\n",
            None,
        )
        .unwrap();
        assert_eq!(cfg.snr_db_grid, vec![0.0, 10.0]);
        assert_eq!((cfg.trials, cfg.seed), (7, 9));
        assert_eq!(cfg.k_rule, KRule::CeilP);
    }

    #[test]
    fn parse_errors() {
        assert!(matches!(ExperimentConfig::parse("bogus = 1", Some(Experiment::Fig2SumrateD1)), Err(Error::Config(_))));
        assert!(matches!(ExperimentConfig::parse("trials = 1\ntrials = 2", Some(Experiment::Fig2SumrateD1)), Err(Error::Config(_))));
        assert!(matches!(ExperimentConfig::parse("trials = 0", Some(Experiment::Fig2SumrateD1)), Err(Error::Config(_))));
        assert!(matches!(ExperimentConfig::parse("experiment = fig9", None), Err(Error::UnknownExperiment(_))));
        assert!(matches!(ExperimentConfig::parse("trials = 3", None), Err(Error::Config(_))));
        assert!(matches!(
            ExperimentConfig::parse("experiment = fig5_sumrate_d2", Some(Experiment::Fig2SumrateD1)),
            Err(Error::Config(_))
        ));
        assert!(matches!(ExperimentConfig::parse("d = 2", Some(Experiment::Fig2SumrateD1)), Err(Error::Config(_))));
        assert!(matches!(ExperimentConfig::parse("K_rule = ceil_P_pow(5)", Some(Experiment::Fig5SumrateD2)), Err(Error::Config(_))));
        assert!(matches!(ExperimentConfig::parse("bits_grid = 3", Some(Experiment::Fig6OiaVsIa)), Err(Error::Config(_))));
        assert!(ExperimentConfig::parse("no equals sign", Some(Experiment::Fig2SumrateD1)).is_err());
    }

    #[test]
    fn every_default_is_valid() {
        for e in Experiment::ALL {
            ExperimentConfig::defaults(e).validate().unwrap();
            assert_eq!(e.name().parse::<Experiment>().unwrap(), e);
        }
    }
}
