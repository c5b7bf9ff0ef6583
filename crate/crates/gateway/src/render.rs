//! Payloads and text renderings shared by the CLI and the HTTP service.

use std::fmt::Write as _;

use munidss_core::{
    Analysis, CoverageReport, InfluenceMethod, NodeId, Rating, ScenarioOutcome, SquareMatrix,
};
use serde::{Deserialize, Serialize};

use crate::files::format_number;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum MatrixChoice {
    /// Total influence T.
    #[default]
    Total,
    /// Aggregated direct estimates A.
    Direct,
}

#[derive(Debug, Clone, Serialize)]
pub struct InfluencePayload<'a> {
    pub node_order: &'a [NodeId],
    pub method: InfluenceMethod,
    pub rho_estimate: f64,
    pub direct: &'a SquareMatrix,
    pub total: &'a SquareMatrix,
    pub conflicts: &'a [(NodeId, NodeId)],
}

impl<'a> InfluencePayload<'a> {
    pub fn new(analysis: &'a Analysis<'_>) -> Self {
        let influence = analysis.influence();
        Self {
            node_order: influence.node_order(),
            method: influence.method(),
            rho_estimate: influence.rho_estimate(),
            direct: analysis.impact().weights(),
            total: influence.totals(),
            conflicts: analysis.impact().conflicts(),
        }
    }
}

/// Header row of node ids, then one row per node; 12 significant digits.
pub fn matrix_csv(node_order: &[NodeId], matrix: &SquareMatrix) -> String {
    let mut out = node_order
        .iter()
        .map(NodeId::as_str)
        .collect::<Vec<_>>()
        .join(",");
    out.push('\n');
    for row in matrix.rows() {
        let cells: Vec<String> = row.iter().map(|&x| format_number(x)).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

pub fn rating_table(rating: &Rating) -> String {
    let mut out = format!("target: {}\n", rating.target_id);
    let width = rating
        .entries
        .iter()
        .map(|e| e.indicator_id.as_str().len())
        .max()
        .unwrap_or(0)
        .max("indicator".len());
    let _ = writeln!(
        out,
        "{:>4}  {:<width$}  {:>14}  {:>14}  {:>10}  criticality",
        "rank", "indicator", "total_impact", "direct_impact", "relevance"
    );
    for e in &rating.entries {
        let _ = writeln!(
            out,
            "{:>4}  {:<width$}  {:>14}  {:>14}  {:>10}  {}",
            e.rank,
            e.indicator_id.as_str(),
            format_number(e.total_impact),
            format_number(e.direct_impact),
            format_number(e.relevance),
            e.criticality
        );
    }
    out
}

pub fn outcome_table(outcome: &ScenarioOutcome) -> String {
    let width = outcome
        .deltas
        .keys()
        .map(|k| k.as_str().len())
        .max()
        .unwrap_or(0)
        .max("node".len());
    let mut out = format!("{:<width$}  delta\n", "node");
    for (id, delta) in &outcome.deltas {
        let _ = writeln!(out, "{:<width$}  {}", id.as_str(), format_number(*delta));
    }
    out
}

pub fn coverage_table(report: &CoverageReport) -> String {
    let list = |kinds: &std::collections::BTreeSet<munidss_core::DocumentKind>| {
        if kinds.is_empty() {
            "none".to_owned()
        } else {
            kinds
                .iter()
                .map(|k| {
                    serde_json::to_value(k)
                        .ok()
                        .and_then(|v| v.as_str().map(str::to_owned))
                        .unwrap_or_default()
                })
                .collect::<Vec<_>>()
                .join(", ")
        }
    };
    format!(
        "missing: {}\nduplicates: {}\n",
        list(&report.missing),
        list(&report.duplicates)
    )
}
