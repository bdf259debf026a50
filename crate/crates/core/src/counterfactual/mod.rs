//! Per-owner exclusion runs and the resulting LSIS reports.
//!
//! The top `k` owners by time-weighted liquidity are each removed from the
//! event history in turn; the mean price impact of one fixed synthetic swap
//! set is compared between the full and the reduced profile.

pub mod baselines;
pub mod classify;
pub mod report;

use std::collections::BTreeMap;
use std::fmt;

use bigdecimal::BigDecimal;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

pub use baselines::{baseline_b1, baseline_b2, baseline_b3, baseline_flags, BaselineFlags};
pub use classify::{classify, ClassifierConfig, Label};

use crate::decimal::{self, div, is_zero};
use crate::error::{Error, Result};
use crate::etwl::{self, EtwlEntry, EtwlOptions};
use crate::liquidity::LiquidityProfile;
use crate::swap_math::{generate_synthetic_swaps, Averaging, ImpactModel, SwapBook, SwapGrid, SyntheticSwap};
use crate::types::{Address, EventDataset};

/// Relative degradation; `Unbounded` when removal leaves no swap computable.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LsisValue {
    Finite(BigDecimal),
    Unbounded,
}

impl LsisValue {
    pub fn is_unbounded(&self) -> bool {
        matches!(self, LsisValue::Unbounded)
    }

    pub fn finite(&self) -> Option<&BigDecimal> {
        match self {
            LsisValue::Finite(v) => Some(v),
            LsisValue::Unbounded => None,
        }
    }

    /// `(alternative − baseline) / baseline`, or 0 when the baseline is 0.
    pub fn relative(baseline: &BigDecimal, alternative: &BigDecimal) -> Self {
        if is_zero(baseline) {
            return LsisValue::Finite(BigDecimal::zero());
        }
        LsisValue::Finite(div(&(alternative - baseline), baseline))
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            LsisValue::Finite(v) => decimal::to_f64(v),
            LsisValue::Unbounded => f64::INFINITY,
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.trim() {
            "inf" | "+inf" | "Infinity" => Ok(LsisValue::Unbounded),
            other => decimal::parse(other).map(LsisValue::Finite),
        }
    }
}

impl Ord for LsisValue {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        use std::cmp::Ordering::*;
        match (self, other) {
            (LsisValue::Unbounded, LsisValue::Unbounded) => Equal,
            (LsisValue::Unbounded, _) => Greater,
            (_, LsisValue::Unbounded) => Less,
            (LsisValue::Finite(a), LsisValue::Finite(b)) => a.cmp(b),
        }
    }
}

impl PartialOrd for LsisValue {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for LsisValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LsisValue::Finite(v) => f.write_str(&decimal::fmt(v)),
            LsisValue::Unbounded => f.write_str("inf"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LsisReport {
    pub owner: Address,
    pub etwl_rank: usize,
    /// Mean impact over the swaps computable in both profiles.
    pub pi_baseline: BigDecimal,
    /// `None` when the exclusion leaves no swap computable.
    pub pi_excluded: Option<BigDecimal>,
    pub lsis: LsisValue,
    pub skipped_swaps: usize,
    pub baseline_flags: BaselineFlags,
    pub label: Label,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnalysisConfig {
    pub k: usize,
    pub lambda: BigDecimal,
    pub grid_start: BigDecimal,
    pub grid_end: BigDecimal,
    pub grid_step: BigDecimal,
    pub seed: u64,
    pub classifier: ClassifierConfig,
    pub model: ImpactModel,
    pub averaging: Averaging,
    pub etwl: EtwlOptions,
    /// B2 share as a fraction of peak pool liquidity.
    pub b2_share: BigDecimal,
    /// Keep only this top percentage of reports by LSIS.
    pub top_percentile: Option<BigDecimal>,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        let grid = SwapGrid::default_grid();
        AnalysisConfig {
            k: 100,
            lambda: etwl::default_lambda(),
            grid_start: grid.start,
            grid_end: grid.end,
            grid_step: grid.step,
            seed: 42,
            classifier: ClassifierConfig::default(),
            model: ImpactModel::Symmetric,
            averaging: Averaging::Magnitude,
            etwl: EtwlOptions::default(),
            b2_share: BigDecimal::new(1.into(), 2),
            top_percentile: None,
        }
    }
}

impl AnalysisConfig {
    pub fn grid(&self) -> Result<SwapGrid> {
        SwapGrid::new(self.grid_start.clone(), self.grid_end.clone(), self.grid_step.clone())
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::InvalidArgument("k must be at least 1".into()));
        }
        self.grid()?;
        self.classifier.validate()?;
        if decimal::is_negative(&self.b2_share) {
            return Err(Error::InvalidArgument("B2 share must be non-negative".into()));
        }
        if let Some(p) = &self.top_percentile {
            if !decimal::is_positive(p) || *p > BigDecimal::from(100) {
                return Err(Error::InvalidArgument(format!("top percentile must be in (0, 100], got {p}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct Analysis {
    pub dataset_hash: String,
    pub config: AnalysisConfig,
    /// Mean impact over every baseline-computable swap.
    pub pi_baseline: BigDecimal,
    pub swap_count: usize,
    pub baseline_skipped: usize,
    pub ranking: Vec<EtwlEntry>,
    pub reports: Vec<LsisReport>,
}

/// Full pipeline with a generated swap set.
pub fn run_analysis(dataset: &EventDataset, config: &AnalysisConfig) -> Result<Analysis> {
    config.validate()?;
    let baseline = LiquidityProfile::build(dataset, None);
    let swaps = generate_synthetic_swaps(&baseline, &config.grid()?, config.seed);
    if swaps.is_empty() {
        return Err(Error::EmptyProfile);
    }
    run_with_profile(dataset, baseline, swaps, config)
}

/// Pipeline over a caller-supplied swap set (e.g. one imported from JSONL).
pub fn run_analysis_with_swaps(
    dataset: &EventDataset,
    swaps: Vec<SyntheticSwap>,
    config: &AnalysisConfig,
) -> Result<Analysis> {
    config.validate()?;
    let baseline = LiquidityProfile::build(dataset, None);
    if swaps.is_empty() {
        return Err(Error::InvalidArgument("swap set is empty".into()));
    }
    run_with_profile(dataset, baseline, swaps, config)
}

fn run_with_profile(
    dataset: &EventDataset,
    baseline: LiquidityProfile,
    swaps: Vec<SyntheticSwap>,
    config: &AnalysisConfig,
) -> Result<Analysis> {
    let scores = etwl::compute_etwl_with(dataset, &config.lambda, config.etwl);
    let ranking = etwl::rank_all(&scores);
    let top: Vec<EtwlEntry> = ranking.iter().take(config.k).cloned().collect();

    let book = SwapBook::new(swaps, &baseline, config.model, config.averaging);
    let summary = book.baseline()?;
    let flags = baseline_flags(dataset, &config.b2_share);

    let job = |entry: &EtwlEntry| -> LsisReport {
        let excluded = LiquidityProfile::build(dataset, Some(&entry.owner));
        let (paired, baseline_skipped, exhausted) = book.compare(&excluded);
        let (pi_baseline, pi_excluded, lsis) = match paired {
            Some(p) => {
                let lsis = LsisValue::relative(&p.pi_baseline, &p.pi_alternative);
                (p.pi_baseline, Some(p.pi_alternative), lsis)
            }
            None => (summary.mean.clone(), None, LsisValue::Unbounded),
        };
        let baseline_flags = flags.get(&entry.owner).copied().unwrap_or_default();
        LsisReport {
            owner: entry.owner,
            etwl_rank: entry.rank,
            label: classify(&lsis, entry.rank, baseline_flags, &config.classifier),
            pi_baseline,
            pi_excluded,
            lsis,
            skipped_swaps: baseline_skipped + exhausted,
            baseline_flags,
        }
    };

    #[cfg(feature = "parallel")]
    let mut reports: Vec<LsisReport> = {
        use rayon::prelude::*;
        top.par_iter().map(job).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let mut reports: Vec<LsisReport> = top.iter().map(job).collect();

    sort_reports(&mut reports);
    if let Some(p) = &config.top_percentile {
        reports.truncate(top_percentile_count(reports.len(), p));
    }
    Ok(Analysis {
        dataset_hash: dataset.content_hash(),
        config: config.clone(),
        pi_baseline: summary.mean,
        swap_count: book.len(),
        baseline_skipped: summary.skipped,
        ranking: ranking.into_iter().take(config.k).collect(),
        reports,
    })
}

/// LSIS descending, then owner address ascending.
pub fn sort_reports(reports: &mut [LsisReport]) {
    reports.sort_by(|a, b| b.lsis.cmp(&a.lsis).then_with(|| a.owner.cmp(&b.owner)));
}

/// `ceil(n · pct / 100)`, at least 1 when `n > 0`.
fn top_percentile_count(n: usize, pct: &BigDecimal) -> usize {
    use num_traits::ToPrimitive;
    let exact = pct * BigDecimal::from(n as u64) / BigDecimal::from(100);
    let ceil = exact.with_scale_round(0, bigdecimal::RoundingMode::Ceiling);
    ceil.to_usize().unwrap_or(n).clamp(n.min(1), n)
}

/// Re-applies the classifier to existing reports (e.g. with new thresholds).
pub fn relabel(reports: &mut [LsisReport], config: &ClassifierConfig) {
    for r in reports {
        r.label = classify(&r.lsis, r.etwl_rank, r.baseline_flags, config);
    }
}

/// Owners whose exclusion was evaluated, keyed to their report.
pub fn reports_by_owner(reports: &[LsisReport]) -> BTreeMap<Address, &LsisReport> {
    reports.iter().map(|r| (r.owner, r)).collect()
}
