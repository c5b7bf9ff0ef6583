//! Validated domain types for the indicator-rating problem.
//!
//! A [`Project`] carries everything needed to rate indicators for one
//! municipality: its profile, the indicators and targeted indicators, the
//! experts' signed impact estimates, the permitted value ranges and the
//! configuration of the criticality decision functions.

use std::borrow::Borrow;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::assessment::CriticalityConfig;
use crate::error::{Error, Result};
use crate::planning::DocumentRecord;

/// Identifier of an indicator or targeted indicator. Both share one namespace
/// because they are nodes of the same impact matrix.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(String);

impl NodeId {
    pub fn new(id: impl Into<String>) -> Self {
        Self(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl Borrow<str> for NodeId {
    fn borrow(&self) -> &str {
        &self.0
    }
}

impl From<&str> for NodeId {
    fn from(s: &str) -> Self {
        Self(s.to_owned())
    }
}

impl From<String> for NodeId {
    fn from(s: String) -> Self {
        Self(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IndicatorKind {
    Quantitative,
    Qualitative,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum IndicatorValue {
    Number(f64),
    Label(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Indicator {
    pub id: NodeId,
    pub name: String,
    pub kind: IndicatorKind,
    pub current_value: IndicatorValue,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub unit: Option<String>,
}

impl Indicator {
    pub fn quantitative(id: &str, value: f64) -> Self {
        Self {
            id: id.into(),
            name: id.to_owned(),
            kind: IndicatorKind::Quantitative,
            current_value: IndicatorValue::Number(value),
            unit: None,
        }
    }

    pub fn qualitative(id: &str, label: &str) -> Self {
        Self {
            id: id.into(),
            name: id.to_owned(),
            kind: IndicatorKind::Qualitative,
            current_value: IndicatorValue::Label(label.to_owned()),
            unit: None,
        }
    }
}

/// A goal-level indicator. Targets only ever receive impact.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TargetIndicator {
    pub id: NodeId,
    pub name: String,
}

impl TargetIndicator {
    pub fn new(id: &str) -> Self {
        Self {
            id: id.into(),
            name: id.to_owned(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum Permitted {
    Quantitative { lo: f64, hi: f64 },
    Qualitative { allowed: BTreeSet<String> },
}

impl Permitted {
    pub fn kind(&self) -> IndicatorKind {
        match self {
            Permitted::Quantitative { .. } => IndicatorKind::Quantitative,
            Permitted::Qualitative { .. } => IndicatorKind::Qualitative,
        }
    }
}

/// Standard (permitted) values of one indicator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PermittedRange {
    pub indicator_id: NodeId,
    pub permitted: Permitted,
}

impl PermittedRange {
    pub fn interval(indicator_id: &str, lo: f64, hi: f64) -> Self {
        Self {
            indicator_id: indicator_id.into(),
            permitted: Permitted::Quantitative { lo, hi },
        }
    }

    pub fn labels<'a>(indicator_id: &str, allowed: impl IntoIterator<Item = &'a str>) -> Self {
        Self {
            indicator_id: indicator_id.into(),
            permitted: Permitted::Qualitative {
                allowed: allowed.into_iter().map(str::to_owned).collect(),
            },
        }
    }
}

/// One expert's signed estimate of how `source` moves `sink`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ImpactEstimate {
    pub expert_id: String,
    pub source: NodeId,
    pub sink: NodeId,
    pub value: f64,
}

impl ImpactEstimate {
    pub fn new(expert_id: &str, source: &str, sink: &str, value: f64) -> Self {
        Self {
            expert_id: expert_id.to_owned(),
            source: source.into(),
            sink: sink.into(),
            value,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MfType {
    UrbanOkrug,
    MunicipalDistrict,
    UrbanSettlement,
    RuralSettlement,
    Other(String),
}

impl fmt::Display for MfType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MfType::UrbanOkrug => f.write_str("urban_okrug"),
            MfType::MunicipalDistrict => f.write_str("municipal_district"),
            MfType::UrbanSettlement => f.write_str("urban_settlement"),
            MfType::RuralSettlement => f.write_str("rural_settlement"),
            MfType::Other(s) => write!(f, "other:{s}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SedLevel {
    Low,
    Medium,
    High,
}

impl fmt::Display for SedLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SedLevel::Low => "low",
            SedLevel::Medium => "medium",
            SedLevel::High => "high",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MunicipalProfile {
    pub mf_type: MfType,
    pub sed_level: SedLevel,
    pub rural_settlement_count: u32,
}

impl Default for MunicipalProfile {
    fn default() -> Self {
        Self {
            mf_type: MfType::MunicipalDistrict,
            sed_level: SedLevel::Medium,
            rural_settlement_count: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AggregationPolicy {
    #[default]
    Mean,
    Median,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Project {
    pub id: String,
    #[serde(default)]
    pub profile: MunicipalProfile,
    pub indicators: Vec<Indicator>,
    pub targets: Vec<TargetIndicator>,
    #[serde(default)]
    pub estimates: Vec<ImpactEstimate>,
    #[serde(default)]
    pub ranges: Vec<PermittedRange>,
    #[serde(default)]
    pub aggregation: AggregationPolicy,
    #[serde(default)]
    pub criticality_config: CriticalityConfig,
    #[serde(default)]
    pub documents: Vec<DocumentRecord>,
    #[serde(default)]
    pub revision: u64,
}

impl Project {
    pub fn new(id: &str) -> Self {
        Self {
            id: id.to_owned(),
            profile: MunicipalProfile::default(),
            indicators: Vec::new(),
            targets: Vec::new(),
            estimates: Vec::new(),
            ranges: Vec::new(),
            aggregation: AggregationPolicy::default(),
            criticality_config: CriticalityConfig::default(),
            documents: Vec::new(),
            revision: 0,
        }
    }

    pub fn indicator(&self, id: &str) -> Option<&Indicator> {
        self.indicators.iter().find(|i| i.id.as_str() == id)
    }

    pub fn target(&self, id: &str) -> Option<&TargetIndicator> {
        self.targets.iter().find(|t| t.id.as_str() == id)
    }

    pub fn range_for(&self, id: &str) -> Option<&PermittedRange> {
        self.ranges.iter().find(|r| r.indicator_id.as_str() == id)
    }

    /// Indicator ids ascending.
    pub fn indicator_ids(&self) -> Vec<NodeId> {
        let mut ids: Vec<_> = self.indicators.iter().map(|i| i.id.clone()).collect();
        ids.sort();
        ids
    }

    /// Target ids ascending.
    pub fn target_ids(&self) -> Vec<NodeId> {
        let mut ids: Vec<_> = self.targets.iter().map(|t| t.id.clone()).collect();
        ids.sort();
        ids
    }

    /// Matrix node order: indicators ascending, then targets ascending.
    pub fn node_order(&self) -> Vec<NodeId> {
        let mut order = self.indicator_ids();
        order.extend(self.target_ids());
        order
    }

    /// Sorts every list into id order. Content is unchanged.
    pub fn sort_lists(&mut self) {
        self.indicators.sort_by(|a, b| a.id.cmp(&b.id));
        self.targets.sort_by(|a, b| a.id.cmp(&b.id));
        self.ranges.sort_by(|a, b| a.indicator_id.cmp(&b.indicator_id));
        self.estimates.sort_by(|a, b| {
            (&a.source, &a.sink, &a.expert_id)
                .cmp(&(&b.source, &b.sink, &b.expert_id))
                .then(a.value.total_cmp(&b.value))
        });
        self.documents.sort_by(|a, b| {
            (a.kind, &a.title, a.adopted_on).cmp(&(b.kind, &b.title, b.adopted_on))
        });
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ImpactDirection {
    Negative,
    None,
    Positive,
}

/// Piecewise expert-estimate rule: `[-1, 0)` lowers the sink, `0` means no
/// connection, `(0, 1]` raises the sink.
pub fn classify_impact(value: f64) -> Result<ImpactDirection> {
    if !(-1.0..=1.0).contains(&value) {
        return Err(Error::EstimateOutOfRange { value });
    }
    Ok(if value < 0.0 {
        ImpactDirection::Negative
    } else if value > 0.0 {
        ImpactDirection::Positive
    } else {
        ImpactDirection::None
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Aggregate {
    pub weight: f64,
    /// Experts disagree on the sign.
    pub conflict: bool,
}

/// Combines several experts' estimates of one edge.
///
/// Values are summed in sorted order so the result does not depend on the
/// order the estimates were entered in.
pub fn aggregate_estimates(values: &[f64], policy: AggregationPolicy) -> Result<Aggregate> {
    if values.is_empty() {
        return Err(Error::EmptyEstimates);
    }
    for &value in values {
        classify_impact(value)?;
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let min = sorted[0];
    let max = sorted[sorted.len() - 1];
    let weight = match policy {
        AggregationPolicy::Mean => {
            let mean = sorted.iter().sum::<f64>() / sorted.len() as f64;
            mean.clamp(min, max)
        }
        AggregationPolicy::Median => sorted[(sorted.len() - 1) / 2],
    };
    Ok(Aggregate {
        weight,
        conflict: min < 0.0 && max > 0.0,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ViolationCode {
    EmptyId,
    DuplicateId,
    NoIndicators,
    NoTargets,
    NonFiniteValue,
    KindMismatch,
    DanglingSource,
    DanglingSink,
    TargetAsSource,
    SelfEstimate,
    EstimateRange,
    MissingRange,
    DuplicateRange,
    DanglingRange,
    RangeOrder,
    RangeKindMismatch,
    EmptyAllowed,
    ThresholdOrder,
    UnknownTarget,
    EmptyTitle,
}

impl fmt::Display for ViolationCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        // SCREAMING_SNAKE_CASE, matching the serialized form.
        let name = format!("{self:?}");
        let mut out = String::with_capacity(name.len() + 4);
        for (i, c) in name.chars().enumerate() {
            if c.is_ascii_uppercase() && i > 0 {
                out.push('_');
            }
            out.push(c.to_ascii_uppercase());
        }
        f.write_str(&out)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub code: ViolationCode,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn contains(&self, code: ViolationCode) -> bool {
        self.violations.iter().any(|v| v.code == code)
    }

    pub fn codes(&self) -> BTreeSet<ViolationCode> {
        self.violations.iter().map(|v| v.code).collect()
    }

    fn push(&mut self, code: ViolationCode, message: String) {
        self.violations.push(Violation { code, message });
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for v in &self.violations {
            if !first {
                f.write_str("; ")?;
            }
            first = false;
            write!(f, "{}: {}", v.code, v.message)?;
        }
        Ok(())
    }
}

/// Checks every project invariant. Violations are returned as data.
pub fn validate_project(project: &Project) -> ValidationReport {
    use ViolationCode::*;

    let mut report = ValidationReport::default();

    if project.indicators.is_empty() {
        report.push(NoIndicators, "project has no indicators".into());
    }
    if project.targets.is_empty() {
        report.push(NoTargets, "project has no targeted indicators".into());
    }

    let mut seen = BTreeSet::new();
    let node_ids = project
        .indicators
        .iter()
        .map(|i| &i.id)
        .chain(project.targets.iter().map(|t| &t.id));
    for id in node_ids {
        if id.as_str().is_empty() {
            report.push(EmptyId, "indicator or target with an empty id".into());
        } else if !seen.insert(id.as_str()) {
            report.push(DuplicateId, format!("id `{id}` is used more than once"));
        }
    }

    let indicators: BTreeMap<&str, &Indicator> = project
        .indicators
        .iter()
        .map(|i| (i.id.as_str(), i))
        .collect();
    let targets: BTreeSet<&str> = project.targets.iter().map(|t| t.id.as_str()).collect();

    for indicator in &project.indicators {
        match (&indicator.kind, &indicator.current_value) {
            (IndicatorKind::Quantitative, IndicatorValue::Number(v)) => {
                if !v.is_finite() {
                    report.push(
                        NonFiniteValue,
                        format!("indicator `{}` has a non-finite value", indicator.id),
                    );
                }
            }
            (IndicatorKind::Qualitative, IndicatorValue::Label(_)) => {}
            _ => report.push(
                KindMismatch,
                format!("indicator `{}` value does not match its kind", indicator.id),
            ),
        }
    }

    for e in &project.estimates {
        let source_is_indicator = indicators.contains_key(e.source.as_str());
        if targets.contains(e.source.as_str()) {
            report.push(
                TargetAsSource,
                format!("estimate from target `{}`; targets are sinks", e.source),
            );
        } else if !source_is_indicator {
            report.push(
                DanglingSource,
                format!("estimate source `{}` does not exist", e.source),
            );
        }
        if !indicators.contains_key(e.sink.as_str()) && !targets.contains(e.sink.as_str()) {
            report.push(
                DanglingSink,
                format!("estimate sink `{}` does not exist", e.sink),
            );
        }
        if e.source == e.sink {
            report.push(
                SelfEstimate,
                format!("estimate of `{}` on itself", e.source),
            );
        }
        if classify_impact(e.value).is_err() {
            report.push(
                EstimateRange,
                format!(
                    "estimate {} -> {} by `{}` has value {} outside [-1, 1]",
                    e.source, e.sink, e.expert_id, e.value
                ),
            );
        }
    }

    let mut ranged = BTreeSet::new();
    for range in &project.ranges {
        let id = range.indicator_id.as_str();
        let Some(indicator) = indicators.get(id) else {
            report.push(
                DanglingRange,
                format!("permitted range for unknown indicator `{id}`"),
            );
            continue;
        };
        if !ranged.insert(id) {
            report.push(
                DuplicateRange,
                format!("indicator `{id}` has more than one permitted range"),
            );
        }
        if range.permitted.kind() != indicator.kind {
            report.push(
                RangeKindMismatch,
                format!("permitted range of `{id}` does not match the indicator kind"),
            );
        }
        match &range.permitted {
            Permitted::Quantitative { lo, hi } => {
                if !lo.is_finite() || !hi.is_finite() {
                    report.push(
                        NonFiniteValue,
                        format!("permitted range of `{id}` has a non-finite bound"),
                    );
                } else if lo > hi {
                    report.push(
                        RangeOrder,
                        format!("permitted range of `{id}` has lo {lo} > hi {hi}"),
                    );
                }
            }
            Permitted::Qualitative { allowed } => {
                if allowed.is_empty() {
                    report.push(
                        EmptyAllowed,
                        format!("permitted label set of `{id}` is empty"),
                    );
                }
            }
        }
    }
    for indicator in &project.indicators {
        if !ranged.contains(indicator.id.as_str()) {
            report.push(
                MissingRange,
                format!("indicator `{}` has no permitted range", indicator.id),
            );
        }
    }

    let config = &project.criticality_config;
    if !config.default.is_ordered() {
        report.push(
            ThresholdOrder,
            "default thresholds must satisfy 0 < moderate < significant < critical".into(),
        );
    }
    for (target, thresholds) in &config.per_target {
        if !targets.contains(target.as_str()) {
            report.push(
                UnknownTarget,
                format!("thresholds configured for unknown target `{target}`"),
            );
        }
        if !thresholds.is_ordered() {
            report.push(
                ThresholdOrder,
                format!(
                    "thresholds of `{target}` must satisfy 0 < moderate < significant < critical"
                ),
            );
        }
    }

    for doc in &project.documents {
        if doc.title.trim().is_empty() {
            report.push(EmptyTitle, "strategic document with an empty title".into());
        }
    }

    report
}

/// Runs [`validate_project`] and converts a non-empty report into an error.
pub fn ensure_valid(project: &Project) -> Result<()> {
    let report = validate_project(project);
    if report.is_valid() {
        Ok(())
    } else {
        Err(Error::Validation(report))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn two_indicator_project() -> Project {
        let mut p = Project::new("demo");
        p.indicators = vec![Indicator::quantitative("a", 5.0), Indicator::quantitative("b", 1.0)];
        p.targets = vec![TargetIndicator::new("t")];
        p.ranges = vec![
            PermittedRange::interval("a", 3.0, 7.0),
            PermittedRange::interval("b", 0.0, 2.0),
        ];
        p.estimates = vec![
            ImpactEstimate::new("e1", "a", "b", 0.5),
            ImpactEstimate::new("e1", "b", "t", -0.3),
        ];
        p
    }

    #[test]
    fn classify_examples() {
        assert_eq!(classify_impact(-0.5).unwrap(), ImpactDirection::Negative);
        assert_eq!(classify_impact(0.0).unwrap(), ImpactDirection::None);
        assert_eq!(classify_impact(0.7).unwrap(), ImpactDirection::Positive);
        assert_eq!(
            classify_impact(1.2),
            Err(Error::EstimateOutOfRange { value: 1.2 })
        );
        assert!(classify_impact(f64::NAN).is_err());
        assert_eq!(classify_impact(-1.0).unwrap(), ImpactDirection::Negative);
        assert_eq!(classify_impact(1.0).unwrap(), ImpactDirection::Positive);
    }

    #[test]
    fn aggregate_examples() {
        let a = aggregate_estimates(&[0.4, 0.6], AggregationPolicy::Mean).unwrap();
        assert!((a.weight - 0.5).abs() < 1e-15);
        assert!(!a.conflict);

        let a = aggregate_estimates(&[-0.5, 0.5], AggregationPolicy::Mean).unwrap();
        assert_eq!(a.weight, 0.0);
        assert!(a.conflict);

        assert_eq!(
            aggregate_estimates(&[], AggregationPolicy::Mean),
            Err(Error::EmptyEstimates)
        );
    }

    #[test]
    fn median_is_lower_median() {
        let a = aggregate_estimates(&[0.9, 0.1, 0.3, 0.5], AggregationPolicy::Median).unwrap();
        assert_eq!(a.weight, 0.3);
        let a = aggregate_estimates(&[0.9, -0.1, 0.3], AggregationPolicy::Median).unwrap();
        assert_eq!(a.weight, 0.3);
        assert!(a.conflict);
    }

    #[test]
    fn aggregate_rejects_out_of_range_member() {
        assert!(aggregate_estimates(&[0.2, 1.5], AggregationPolicy::Mean).is_err());
    }

    #[test]
    fn valid_project_has_empty_report() {
        let report = validate_project(&two_indicator_project());
        assert!(report.is_valid(), "{report}");
    }

    #[test]
    fn estimate_out_of_range_is_reported() {
        let mut p = two_indicator_project();
        p.estimates[0].value = 1.5;
        assert!(validate_project(&p).contains(ViolationCode::EstimateRange));
    }

    #[test]
    fn missing_range_is_reported() {
        let mut p = two_indicator_project();
        p.ranges.pop();
        assert!(validate_project(&p).contains(ViolationCode::MissingRange));
    }

    #[test]
    fn structural_violations_are_reported() {
        let mut p = two_indicator_project();
        p.targets.push(TargetIndicator::new("a"));
        p.estimates.push(ImpactEstimate::new("e1", "t", "a", 0.1));
        p.estimates.push(ImpactEstimate::new("e1", "zz", "yy", 0.1));
        p.estimates.push(ImpactEstimate::new("e1", "a", "a", 0.1));
        p.ranges.push(PermittedRange::interval("b", 2.0, 1.0));
        p.ranges.push(PermittedRange::labels("ghost", ["x"]));
        p.criticality_config
            .per_target
            .insert("nope".into(), Default::default());
        let codes = validate_project(&p).codes();
        for code in [
            ViolationCode::DuplicateId,
            ViolationCode::TargetAsSource,
            ViolationCode::DanglingSource,
            ViolationCode::DanglingSink,
            ViolationCode::SelfEstimate,
            ViolationCode::DuplicateRange,
            ViolationCode::RangeOrder,
            ViolationCode::DanglingRange,
            ViolationCode::UnknownTarget,
        ] {
            assert!(codes.contains(&code), "missing {code:?} in {codes:?}");
        }
    }

    #[test]
    fn empty_project_reports_missing_sets() {
        let codes = validate_project(&Project::new("x")).codes();
        assert!(codes.contains(&ViolationCode::NoIndicators));
        assert!(codes.contains(&ViolationCode::NoTargets));
    }

    #[test]
    fn kind_mismatches_are_reported() {
        let mut p = two_indicator_project();
        p.indicators[0].kind = IndicatorKind::Qualitative;
        p.indicators.push(Indicator::qualitative("q", "good"));
        p.ranges.push(PermittedRange::interval("q", 0.0, 1.0));
        let codes = validate_project(&p).codes();
        assert!(codes.contains(&ViolationCode::KindMismatch));
        assert!(codes.contains(&ViolationCode::RangeKindMismatch));
    }

    #[test]
    fn violation_code_display_matches_serde() {
        for code in [ViolationCode::EstimateRange, ViolationCode::MissingRange, ViolationCode::EmptyId] {
            let serialized = serde_json::to_value(code).unwrap();
            assert_eq!(serialized.as_str().unwrap(), code.to_string());
        }
    }

    #[test]
    fn classify_partitions_grid() {
        for i in 0..=2000 {
            let v = -1.0 + i as f64 * 1e-3;
            let v = if i == 1000 { 0.0 } else { v };
            let d = classify_impact(v).unwrap();
            let expected = match v.partial_cmp(&0.0).unwrap() {
                std::cmp::Ordering::Less => ImpactDirection::Negative,
                std::cmp::Ordering::Equal => ImpactDirection::None,
                std::cmp::Ordering::Greater => ImpactDirection::Positive,
            };
            assert_eq!(d, expected, "at {v}");
        }
    }

    proptest! {
        #[test]
        fn aggregate_permutation_invariant(
            values in prop::collection::vec(-1.0f64..=1.0, 1..12),
            seed in any::<u64>(),
        ) {
            let mut shuffled = values.clone();
            let mut s = seed;
            for i in (1..shuffled.len()).rev() {
                s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                shuffled.swap(i, (s >> 33) as usize % (i + 1));
            }
            for policy in [AggregationPolicy::Mean, AggregationPolicy::Median] {
                let a = aggregate_estimates(&values, policy).unwrap();
                let b = aggregate_estimates(&shuffled, policy).unwrap();
                prop_assert_eq!(a.weight.to_bits(), b.weight.to_bits());
                prop_assert_eq!(a.conflict, b.conflict);
            }
        }

        #[test]
        fn aggregate_within_bounds(values in prop::collection::vec(-1.0f64..=1.0, 1..12)) {
            let min = values.iter().copied().fold(f64::INFINITY, f64::min);
            let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            for policy in [AggregationPolicy::Mean, AggregationPolicy::Median] {
                let a = aggregate_estimates(&values, policy).unwrap();
                prop_assert!(a.weight >= min && a.weight <= max);
            }
        }

        #[test]
        fn validate_is_idempotent(value in -2.0f64..2.0, drop_range in any::<bool>()) {
            let mut p = two_indicator_project();
            p.estimates[0].value = value;
            if drop_range {
                p.ranges.clear();
            }
            let before = p.clone();
            let first = validate_project(&p);
            let second = validate_project(&p);
            prop_assert_eq!(first, second);
            prop_assert_eq!(p, before);
        }
    }
}
