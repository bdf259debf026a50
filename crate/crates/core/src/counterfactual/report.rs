//! CSV and JSON forms of an analysis.

use std::io::Read;

use serde::Serialize;

use super::{Analysis, AnalysisConfig, BaselineFlags, Label, LsisReport, LsisValue};
use crate::decimal;
use crate::error::{Error, Result};
use crate::types::Address;

pub const CSV_HEADER: &str = "owner,etwl_rank,pi_baseline,pi_excluded,lsis,skipped_swaps,b1,b2,b3,label";

pub fn reports_to_csv(reports: &[LsisReport]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in reports {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{}\n",
            r.owner,
            r.etwl_rank,
            decimal::fmt(&r.pi_baseline),
            r.pi_excluded.as_ref().map(decimal::fmt).unwrap_or_default(),
            r.lsis,
            r.skipped_swaps,
            r.baseline_flags.b1,
            r.baseline_flags.b2,
            r.baseline_flags.b3,
            r.label
        ));
    }
    out
}

/// Parses rows written by [`reports_to_csv`].
pub fn reports_from_csv<R: Read>(reader: R) -> Result<Vec<LsisReport>> {
    let mut rdr = csv::Reader::from_reader(reader);
    let headers = rdr.headers().map_err(|e| schema(1, e))?.clone();
    if headers.iter().collect::<Vec<_>>().join(",") != CSV_HEADER {
        return Err(Error::Schema {
            line: 1,
            message: format!("expected header {CSV_HEADER:?}"),
        });
    }
    let mut out = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let line = i + 2;
        let rec = rec.map_err(|e| schema(line, e))?;
        let field = |j: usize| rec.get(j).unwrap_or("");
        let flag = |j: usize| -> Result<bool> { field(j).parse().map_err(|e| schema(line, e)) };
        let owner: Address = field(0).parse().map_err(|e| schema(line, e))?;
        let pi_excluded = match field(3) {
            "" => None,
            s => Some(decimal::parse(s)?),
        };
        out.push(LsisReport {
            owner,
            etwl_rank: field(1).parse().map_err(|e| schema(line, e))?,
            pi_baseline: decimal::parse(field(2))?,
            pi_excluded,
            lsis: LsisValue::parse(field(4))?,
            skipped_swaps: field(5).parse().map_err(|e| schema(line, e))?,
            baseline_flags: BaselineFlags {
                b1: flag(6)?,
                b2: flag(7)?,
                b3: flag(8)?,
            },
            label: field(9).parse::<Label>()?,
        });
    }
    Ok(out)
}

fn schema(line: usize, e: impl std::fmt::Display) -> Error {
    Error::Schema {
        line,
        message: e.to_string(),
    }
}

#[derive(Serialize)]
struct JsonReport<'a> {
    owner: String,
    etwl_rank: usize,
    pi_baseline: String,
    pi_excluded: Option<String>,
    lsis: String,
    lsis_unbounded: bool,
    skipped_swaps: usize,
    baseline_flags: BaselineFlags,
    label: &'a str,
}

#[derive(Serialize)]
struct JsonMetadata<'a> {
    dataset_hash: &'a str,
    lambda: String,
    k: usize,
    seed: u64,
    grid: String,
    thresholds: Thresholds,
    model: crate::swap_math::ImpactModel,
    averaging: crate::swap_math::Averaging,
    close_at_max_block: bool,
    b2_share: String,
    top_percentile: Option<String>,
    pi_baseline: String,
    swap_count: usize,
    baseline_skipped: usize,
}

#[derive(Serialize)]
struct Thresholds {
    lsis_epsilon: String,
    lsis_significant: String,
    lsis_linchpin: String,
    active_rank_max: usize,
}

#[derive(Serialize)]
struct JsonAnalysis<'a> {
    metadata: JsonMetadata<'a>,
    reports: Vec<JsonReport<'a>>,
}

pub fn report_json(r: &LsisReport) -> serde_json::Value {
    serde_json::to_value(json_row(r)).expect("serializable")
}

fn json_row(r: &LsisReport) -> JsonReport<'_> {
    JsonReport {
        owner: r.owner.to_string(),
        etwl_rank: r.etwl_rank,
        pi_baseline: decimal::fmt(&r.pi_baseline),
        pi_excluded: r.pi_excluded.as_ref().map(decimal::fmt),
        lsis: r.lsis.to_string(),
        lsis_unbounded: r.lsis.is_unbounded(),
        skipped_swaps: r.skipped_swaps,
        baseline_flags: r.baseline_flags,
        label: r.label.as_str(),
    }
}

fn metadata<'a>(analysis: &'a Analysis) -> JsonMetadata<'a> {
    let c: &AnalysisConfig = &analysis.config;
    JsonMetadata {
        dataset_hash: &analysis.dataset_hash,
        lambda: decimal::fmt(&c.lambda),
        k: c.k,
        seed: c.seed,
        grid: format!(
            "{},{},{}",
            decimal::fmt(&c.grid_start),
            decimal::fmt(&c.grid_end),
            decimal::fmt(&c.grid_step)
        ),
        thresholds: Thresholds {
            lsis_epsilon: decimal::fmt(&c.classifier.lsis_epsilon),
            lsis_significant: decimal::fmt(&c.classifier.lsis_significant),
            lsis_linchpin: decimal::fmt(&c.classifier.lsis_linchpin),
            active_rank_max: c.classifier.active_rank_max,
        },
        model: c.model,
        averaging: c.averaging,
        close_at_max_block: c.etwl.close_at_max_block,
        b2_share: decimal::fmt(&c.b2_share),
        top_percentile: c.top_percentile.as_ref().map(decimal::fmt),
        pi_baseline: decimal::fmt(&analysis.pi_baseline),
        swap_count: analysis.swap_count,
        baseline_skipped: analysis.baseline_skipped,
    }
}

/// Pretty JSON with run metadata and every report.
pub fn analysis_to_json(analysis: &Analysis) -> String {
    let doc = JsonAnalysis {
        metadata: metadata(analysis),
        reports: analysis.reports.iter().map(json_row).collect(),
    };
    let mut s = serde_json::to_string_pretty(&doc).expect("serializable");
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use bigdecimal::BigDecimal;

    fn sample() -> Vec<LsisReport> {
        vec![
            LsisReport {
                owner: Address::from_index(1),
                etwl_rank: 2,
                pi_baseline: "0.5".parse().unwrap(),
                pi_excluded: None,
                lsis: LsisValue::Unbounded,
                skipped_swaps: 20,
                baseline_flags: BaselineFlags {
                    b1: true,
                    b2: false,
                    b3: false,
                },
                label: Label::LinchpinWhale,
            },
            LsisReport {
                owner: Address::from_index(2),
                etwl_rank: 1,
                pi_baseline: "0.5".parse().unwrap(),
                pi_excluded: Some("0.75".parse().unwrap()),
                lsis: LsisValue::Finite("0.5".parse().unwrap()),
                skipped_swaps: 0,
                baseline_flags: BaselineFlags::default(),
                label: Label::ActiveCriticalWhale,
            },
        ]
    }

    #[test]
    fn csv_round_trip() {
        let rows = sample();
        let text = reports_to_csv(&rows);
        assert!(text.starts_with(CSV_HEADER));
        assert!(text.contains(",,inf,20,true,false,false,LinchpinWhale\n"));
        assert_eq!(reports_from_csv(text.as_bytes()).unwrap(), rows);
    }

    #[test]
    fn csv_rejects_wrong_header() {
        assert!(reports_from_csv("a,b\n1,2\n".as_bytes()).is_err());
    }

    #[test]
    fn json_row_shape() {
        let v = report_json(&sample()[0]);
        assert_eq!(v["lsis"], "inf");
        assert_eq!(v["lsis_unbounded"], true);
        assert!(v["pi_excluded"].is_null());
        let _ = BigDecimal::from(0);
    }
}
