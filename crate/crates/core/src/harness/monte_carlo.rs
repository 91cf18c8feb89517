//! Monte Carlo orchestration and aggregation.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{ScenarioConfig, Scheme};
use super::trial::{run_trial, EpochRecord, TrialOutcome};
use crate::error::Result;

pub const SUMMARY_VERSION: &str = "1";

/// SplitMix64 finalizer.
pub fn splitmix64(i: u64) -> u64 {
    let mut z = i.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of trial `i`: `master ⊕ splitmix64(i)`.
pub fn trial_seed(master_seed: u64, trial: usize) -> u64 {
    master_seed ^ splitmix64(trial as u64)
}

// JSON has no NaN; serde_json writes it as null, so read null back as NaN.
mod nan_as_null {
    use serde::{Deserialize, Deserializer};

    pub fn scalar<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::NAN))
    }

    pub fn vec<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<f64>, D::Error> {
        Ok(Vec::<Option<f64>>::deserialize(d)?
            .into_iter()
            .map(|v| v.unwrap_or(f64::NAN))
            .collect())
    }
}

/// Per-epoch statistics of one scheme across trials. Epochs no trial
/// reached hold NaN (`null` in JSON).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchemeSeries {
    #[serde(deserialize_with = "nan_as_null::vec")]
    pub mean_abs_err_deg: Vec<f64>,
    #[serde(deserialize_with = "nan_as_null::vec")]
    pub rms_err_deg: Vec<f64>,
    #[serde(deserialize_with = "nan_as_null::vec")]
    pub mean_rate_bpshz: Vec<f64>,
    /// Standard error of the mean rate.
    #[serde(deserialize_with = "nan_as_null::vec")]
    pub rate_std_err: Vec<f64>,
    /// Trials contributing to each epoch (diverged trials drop out).
    pub n_trials: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerEpoch {
    pub epoch: Vec<usize>,
    pub t_s: Vec<f64>,
    #[serde(deserialize_with = "nan_as_null::vec")]
    pub theta_true_deg: Vec<f64>,
    pub dfrc: Option<SchemeSeries>,
    pub feedback: Option<SchemeSeries>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchemeTotals {
    pub trials: usize,
    pub diverged_trials: usize,
    #[serde(deserialize_with = "nan_as_null::scalar")]
    pub mean_abs_err_deg: f64,
    pub max_epoch_mean_abs_err_deg: f64,
    #[serde(deserialize_with = "nan_as_null::scalar")]
    pub mean_rate_bpshz: f64,
    pub clamp_events: usize,
    pub track_lost_events: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerScheme {
    pub dfrc: Option<SchemeTotals>,
    pub feedback: Option<SchemeTotals>,
    /// Fraction of epochs where the radar scheme's mean angle error is below
    /// the baseline's; present when both schemes ran.
    pub dfrc_better_epoch_fraction: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub config_echo: ScenarioConfig,
    pub per_epoch: PerEpoch,
    pub per_scheme: PerScheme,
    pub version: String,
}

impl RunSummary {
    pub fn series(&self, scheme: Scheme) -> Option<&SchemeSeries> {
        match scheme {
            Scheme::Dfrc => self.per_epoch.dfrc.as_ref(),
            Scheme::Feedback => self.per_epoch.feedback.as_ref(),
        }
    }

    pub fn totals(&self, scheme: Scheme) -> Option<&SchemeTotals> {
        match scheme {
            Scheme::Dfrc => self.per_scheme.dfrc.as_ref(),
            Scheme::Feedback => self.per_scheme.feedback.as_ref(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    /// Ordered by (scheme, trial, epoch).
    pub records: Vec<EpochRecord>,
    pub outcomes: Vec<TrialOutcome>,
    pub summary: RunSummary,
}

impl RunResult {
    /// True when every trial of every scheme diverged.
    pub fn all_diverged(&self) -> bool {
        self.outcomes.iter().all(|o| o.diverged.is_some())
    }
}

/// Runs every configured scheme over `cfg.trials` trials. Trials execute on
/// the current rayon pool; results do not depend on the thread count.
pub fn run_monte_carlo(cfg: &ScenarioConfig) -> Result<RunResult> {
    cfg.validate()?;
    let mut schemes = cfg.schemes.clone();
    schemes.sort();
    schemes.dedup();
    let jobs: Vec<(Scheme, usize)> = schemes
        .iter()
        .flat_map(|&s| (0..cfg.trials).map(move |t| (s, t)))
        .collect();
    let outcomes = jobs
        .par_iter()
        .map(|&(scheme, trial)| run_trial(cfg, scheme, trial, trial_seed(cfg.master_seed, trial)))
        .collect::<Result<Vec<_>>>()?;
    let records: Vec<EpochRecord> = outcomes
        .iter()
        .flat_map(|o| o.records.iter().cloned())
        .collect();
    let diverged: Vec<(Scheme, usize)> = outcomes
        .iter()
        .filter(|o| o.diverged.is_some())
        .map(|o| (o.scheme, o.trial))
        .collect();
    let summary = summarize(cfg, &records, &diverged);
    Ok(RunResult {
        records,
        outcomes,
        summary,
    })
}

/// Aggregates records (in the order given) into a summary. Only record
/// fields are read, so the result can be recomputed from a trace CSV.
pub fn summarize(
    cfg: &ScenarioConfig,
    records: &[EpochRecord],
    diverged: &[(Scheme, usize)],
) -> RunSummary {
    let epochs = cfg.epochs;
    let mut theta_true = vec![f64::NAN; epochs];
    for r in records {
        if r.epoch >= 1 && r.epoch <= epochs && theta_true[r.epoch - 1].is_nan() {
            theta_true[r.epoch - 1] = r.theta_true_deg;
        }
    }
    let t_s = (1..=epochs).map(|e| e as f64 * cfg.dt).collect();

    let ran = |scheme: Scheme| cfg.schemes.contains(&scheme);
    let series = |scheme: Scheme| ran(scheme).then(|| scheme_series(records, scheme, epochs));
    let dfrc = series(Scheme::Dfrc);
    let feedback = series(Scheme::Feedback);

    let totals = |scheme: Scheme, s: &Option<SchemeSeries>| {
        s.as_ref()
            .map(|s| scheme_totals(records, scheme, s, cfg.trials, diverged))
    };
    let dfrc_totals = totals(Scheme::Dfrc, &dfrc);
    let feedback_totals = totals(Scheme::Feedback, &feedback);

    let better = match (&dfrc, &feedback) {
        (Some(d), Some(f)) => {
            let (mut wins, mut count) = (0usize, 0usize);
            for (a, b) in d.mean_abs_err_deg.iter().zip(&f.mean_abs_err_deg) {
                if a.is_finite() && b.is_finite() {
                    count += 1;
                    if a < b {
                        wins += 1;
                    }
                }
            }
            (count > 0).then(|| wins as f64 / count as f64)
        }
        _ => None,
    };

    RunSummary {
        config_echo: cfg.clone(),
        per_epoch: PerEpoch {
            epoch: (1..=epochs).collect(),
            t_s,
            theta_true_deg: theta_true,
            dfrc,
            feedback,
        },
        per_scheme: PerScheme {
            dfrc: dfrc_totals,
            feedback: feedback_totals,
            dfrc_better_epoch_fraction: better,
        },
        version: SUMMARY_VERSION.to_string(),
    }
}

fn scheme_series(records: &[EpochRecord], scheme: Scheme, epochs: usize) -> SchemeSeries {
    let mut sum_err = vec![0.0; epochs];
    let mut sum_sq_err = vec![0.0; epochs];
    let mut sum_rate = vec![0.0; epochs];
    let mut sum_sq_rate = vec![0.0; epochs];
    let mut n = vec![0usize; epochs];
    for r in records.iter().filter(|r| r.scheme == scheme) {
        let Some(i) = r.epoch.checked_sub(1).filter(|&i| i < epochs) else {
            continue;
        };
        let err = r.abs_angle_error_deg();
        sum_err[i] += err;
        sum_sq_err[i] += err * err;
        sum_rate[i] += r.rate_bpshz;
        sum_sq_rate[i] += r.rate_bpshz * r.rate_bpshz;
        n[i] += 1;
    }
    let mut out = SchemeSeries {
        mean_abs_err_deg: Vec::with_capacity(epochs),
        rms_err_deg: Vec::with_capacity(epochs),
        mean_rate_bpshz: Vec::with_capacity(epochs),
        rate_std_err: Vec::with_capacity(epochs),
        n_trials: n.clone(),
    };
    for i in 0..epochs {
        let k = n[i] as f64;
        let mean_rate = sum_rate[i] / k;
        let var = if n[i] > 1 {
            ((sum_sq_rate[i] - k * mean_rate * mean_rate) / (k - 1.0)).max(0.0)
        } else {
            0.0
        };
        out.mean_abs_err_deg.push(sum_err[i] / k);
        out.rms_err_deg.push((sum_sq_err[i] / k).sqrt());
        out.mean_rate_bpshz.push(mean_rate);
        out.rate_std_err.push((var / k).sqrt());
    }
    out
}

fn scheme_totals(
    records: &[EpochRecord],
    scheme: Scheme,
    series: &SchemeSeries,
    trials: usize,
    diverged: &[(Scheme, usize)],
) -> SchemeTotals {
    let mine = || records.iter().filter(|r| r.scheme == scheme);
    let count = mine().count() as f64;
    SchemeTotals {
        trials,
        diverged_trials: diverged.iter().filter(|(s, _)| *s == scheme).count(),
        mean_abs_err_deg: mine().map(EpochRecord::abs_angle_error_deg).sum::<f64>() / count,
        max_epoch_mean_abs_err_deg: series
            .mean_abs_err_deg
            .iter()
            .copied()
            .filter(|v| v.is_finite())
            .fold(0.0, f64::max),
        mean_rate_bpshz: mine().map(|r| r.rate_bpshz).sum::<f64>() / count,
        clamp_events: mine().filter(|r| r.clamped).count(),
        track_lost_events: mine().filter(|r| r.track_lost).count(),
    }
}
