//! Indicator assessments, per-target ratings and what-if predictions.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::domain::{Indicator, IndicatorValue, NodeId, Permitted, PermittedRange, Project, TargetIndicator};
use crate::error::{Error, Result};
use crate::influence::{ImpactMatrix, InfluenceMatrix};
use crate::linalg::Exec;

/// Lower bounds of the Critical, Significant and Moderate levels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Thresholds {
    pub critical: f64,
    pub significant: f64,
    pub moderate: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self {
            critical: 0.75,
            significant: 0.5,
            moderate: 0.25,
        }
    }
}

impl Thresholds {
    /// `0 < moderate < significant < critical`, all finite.
    pub fn is_ordered(&self) -> bool {
        0.0 < self.moderate
            && self.moderate < self.significant
            && self.significant < self.critical
            && self.critical.is_finite()
    }

    /// Lower bounds are inclusive.
    pub fn level(&self, total_impact: f64) -> CriticalityLevel {
        let a = total_impact.abs();
        if a >= self.critical {
            CriticalityLevel::Critical
        } else if a >= self.significant {
            CriticalityLevel::Significant
        } else if a >= self.moderate {
            CriticalityLevel::Moderate
        } else {
            CriticalityLevel::Negligible
        }
    }
}

/// Persisted criticality settings: a default threshold triple plus optional
/// per-target overrides.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CriticalityConfig {
    #[serde(default)]
    pub default: Thresholds,
    #[serde(default)]
    pub per_target: BTreeMap<NodeId, Thresholds>,
}

impl CriticalityConfig {
    /// One decision function per targeted indicator.
    pub fn resolve(&self, targets: &[TargetIndicator]) -> DecisionFunctions {
        DecisionFunctions {
            by_target: targets
                .iter()
                .map(|t| {
                    let th = self.per_target.get(&t.id).copied().unwrap_or(self.default);
                    (t.id.clone(), th)
                })
                .collect(),
        }
    }
}

/// The set of criticality decision functions, keyed by target.
#[derive(Debug, Clone, PartialEq)]
pub struct DecisionFunctions {
    by_target: BTreeMap<NodeId, Thresholds>,
}

impl DecisionFunctions {
    pub fn len(&self) -> usize {
        self.by_target.len()
    }

    pub fn is_empty(&self) -> bool {
        self.by_target.is_empty()
    }

    pub fn thresholds(&self, target_id: &str) -> Option<&Thresholds> {
        self.by_target.get(target_id)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CriticalityLevel {
    Negligible,
    Moderate,
    Significant,
    Critical,
}

impl std::fmt::Display for CriticalityLevel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            CriticalityLevel::Negligible => "negligible",
            CriticalityLevel::Moderate => "moderate",
            CriticalityLevel::Significant => "significant",
            CriticalityLevel::Critical => "critical",
        })
    }
}

pub fn criticality(
    total_impact: f64,
    functions: &DecisionFunctions,
    target_id: &str,
) -> Result<CriticalityLevel> {
    functions
        .thresholds(target_id)
        .map(|th| th.level(total_impact))
        .ok_or_else(|| Error::UnknownTarget(target_id.into()))
}

/// Normalized deviation of the current value from the permitted range;
/// zero inside the range, capped at one.
pub fn relevance(indicator: &Indicator, range: &PermittedRange) -> Result<f64> {
    if range.indicator_id != indicator.id {
        return Err(Error::RangeOwner {
            indicator: indicator.id.clone(),
            range: range.indicator_id.clone(),
        });
    }
    match (&indicator.current_value, &range.permitted) {
        (IndicatorValue::Number(v), Permitted::Quantitative { lo, hi }) => {
            let (v, lo, hi) = (*v, *lo, *hi);
            if lo <= v && v <= hi {
                return Ok(0.0);
            }
            let deviation = (lo - v).max(v - hi);
            let scale = if hi > lo { hi - lo } else { hi.abs().max(1.0) };
            Ok((deviation / scale).min(1.0))
        }
        (IndicatorValue::Label(label), Permitted::Qualitative { allowed }) => {
            Ok(if allowed.contains(label) { 0.0 } else { 1.0 })
        }
        _ => Err(Error::KindMismatch(indicator.id.clone())),
    }
}

/// Relevance, direct and total impact, and criticality of one indicator.
/// Vectors are indexed by target in ascending id order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IndicatorAssessment {
    pub indicator_id: NodeId,
    pub relevance: f64,
    pub direct_impact: Vec<f64>,
    pub total_impact: Vec<f64>,
    pub criticality: Vec<CriticalityLevel>,
}

fn check_dimensions(project: &Project, impact: &ImpactMatrix, influence: &InfluenceMatrix) -> Result<()> {
    let order = project.node_order();
    if impact.node_order() != order.as_slice()
        || influence.node_order() != order.as_slice()
        || impact.indicator_count() != project.indicators.len()
        || influence.indicator_count() != project.indicators.len()
    {
        return Err(Error::DimensionMismatch);
    }
    Ok(())
}

fn relevance_by_id(project: &Project) -> Result<BTreeMap<NodeId, f64>> {
    project
        .indicators
        .iter()
        .map(|ind| {
            let range = project
                .range_for(ind.id.as_str())
                .ok_or_else(|| Error::UnknownIndicator(ind.id.clone()))?;
            Ok((ind.id.clone(), relevance(ind, range)?))
        })
        .collect()
}

pub fn assess(
    project: &Project,
    impact: &ImpactMatrix,
    influence: &InfluenceMatrix,
) -> Result<Vec<IndicatorAssessment>> {
    check_dimensions(project, impact, influence)?;
    let functions = project.criticality_config.resolve(&project.targets);
    let relevance = relevance_by_id(project)?;
    let n = impact.indicator_count();
    let targets = &impact.node_order()[n..];

    impact.node_order()[..n]
        .iter()
        .enumerate()
        .map(|(i, id)| {
            let direct_impact: Vec<f64> = (n..n + targets.len())
                .map(|j| impact.weights().get(i, j))
                .collect();
            let total_impact: Vec<f64> = (n..n + targets.len())
                .map(|j| influence.totals().get(i, j))
                .collect();
            let criticality = total_impact
                .iter()
                .zip(targets)
                .map(|(&t, target)| criticality(t, &functions, target.as_str()))
                .collect::<Result<_>>()?;
            Ok(IndicatorAssessment {
                indicator_id: id.clone(),
                relevance: relevance[id],
                direct_impact,
                total_impact,
                criticality,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RatingEntry {
    pub indicator_id: NodeId,
    pub rank: usize,
    /// Signed total impact on the target; ordering uses its magnitude.
    pub total_impact: f64,
    pub direct_impact: f64,
    pub relevance: f64,
    pub criticality: CriticalityLevel,
}

/// Indicators ordered by their influence on one targeted indicator.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Rating {
    pub target_id: NodeId,
    pub entries: Vec<RatingEntry>,
}

impl Rating {
    pub fn entry(&self, indicator_id: &str) -> Option<&RatingEntry> {
        self.entries.iter().find(|e| e.indicator_id.as_str() == indicator_id)
    }

    pub fn rank_of(&self, indicator_id: &str) -> Option<usize> {
        self.entry(indicator_id).map(|e| e.rank)
    }
}

/// Rating order: larger |total| first, then larger relevance, then id.
pub fn rating_order(a: &RatingEntry, b: &RatingEntry) -> Ordering {
    b.total_impact
        .abs()
        .total_cmp(&a.total_impact.abs())
        .then(b.relevance.total_cmp(&a.relevance))
        .then_with(|| a.indicator_id.cmp(&b.indicator_id))
}

pub fn rating(
    project: &Project,
    impact: &ImpactMatrix,
    influence: &InfluenceMatrix,
    target_id: &str,
) -> Result<Rating> {
    check_dimensions(project, impact, influence)?;
    let relevance = relevance_by_id(project)?;
    rating_with(project, impact, influence, &relevance, target_id)
}

fn rating_with(
    project: &Project,
    impact: &ImpactMatrix,
    influence: &InfluenceMatrix,
    relevance: &BTreeMap<NodeId, f64>,
    target_id: &str,
) -> Result<Rating> {
    let functions = project.criticality_config.resolve(&project.targets);
    let n = impact.indicator_count();
    let column = impact.node_order()[n..]
        .iter()
        .position(|t| t.as_str() == target_id)
        .map(|j| n + j)
        .ok_or_else(|| Error::UnknownTarget(target_id.into()))?;

    let mut entries = impact.node_order()[..n]
        .iter()
        .enumerate()
        .map(|(i, id)| {
            let total = influence.totals().get(i, column);
            Ok(RatingEntry {
                indicator_id: id.clone(),
                rank: 0,
                total_impact: total,
                direct_impact: impact.weights().get(i, column),
                relevance: relevance[id],
                criticality: criticality(total, &functions, target_id)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    entries.sort_by(rating_order);
    for (pos, entry) in entries.iter_mut().enumerate() {
        entry.rank = pos + 1;
    }
    Ok(Rating {
        target_id: target_id.into(),
        entries,
    })
}

/// Ratings for every target, in ascending target id order.
pub fn ratings(
    project: &Project,
    impact: &ImpactMatrix,
    influence: &InfluenceMatrix,
    exec: Exec,
) -> Result<Vec<Rating>> {
    check_dimensions(project, impact, influence)?;
    let relevance = relevance_by_id(project)?;
    let targets = project.target_ids();
    let one = |t: &NodeId| rating_with(project, impact, influence, &relevance, t.as_str());
    match exec {
        #[cfg(feature = "parallel")]
        Exec::Parallel => targets.par_iter().map(one).collect(),
        _ => targets.iter().map(one).collect(),
    }
}

/// Additive shocks on indicators.
pub type Scenario = BTreeMap<NodeId, f64>;

/// Predicted change at every node.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioOutcome {
    pub deltas: BTreeMap<NodeId, f64>,
}

/// First-order prediction: `Δ[v] = shock[v] + Σ_u shock[u]·T[u][v]`.
pub fn what_if(project: &Project, influence: &InfluenceMatrix, scenario: &Scenario) -> Result<ScenarioOutcome> {
    let order = project.node_order();
    if influence.node_order() != order.as_slice() {
        return Err(Error::DimensionMismatch);
    }
    let n = influence.indicator_count();
    let mut shock = vec![0.0; order.len()];
    for (id, &delta) in scenario {
        let idx = influence
            .index_of(id.as_str())
            .ok_or_else(|| Error::UnknownIndicator(id.clone()))?;
        if idx >= n {
            return Err(Error::TargetShock(id.clone()));
        }
        if !delta.is_finite() {
            return Err(Error::NonFiniteShock { id: id.clone() });
        }
        shock[idx] = delta;
    }

    let totals = influence.totals();
    let deltas = order
        .iter()
        .enumerate()
        .map(|(v, id)| {
            let propagated: f64 = shock
                .iter()
                .enumerate()
                .filter(|(_, &s)| s != 0.0)
                .map(|(u, &s)| s * totals.get(u, v))
                .sum();
            (id.clone(), shock[v] + propagated)
        })
        .collect();
    Ok(ScenarioOutcome { deltas })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{ImpactEstimate, Indicator, PermittedRange, TargetIndicator};
    use crate::influence::{build_matrix, total_influence_series};

    fn chain_project() -> Project {
        let mut p = Project::new("chain");
        p.indicators = vec![Indicator::quantitative("a", 5.0), Indicator::quantitative("b", 5.0)];
        p.targets = vec![TargetIndicator::new("t")];
        p.ranges = vec![
            PermittedRange::interval("a", 3.0, 7.0),
            PermittedRange::interval("b", 3.0, 7.0),
        ];
        p.estimates = vec![
            ImpactEstimate::new("e1", "a", "b", 0.5),
            ImpactEstimate::new("e1", "b", "t", 0.4),
            ImpactEstimate::new("e1", "a", "t", 0.2),
        ];
        p
    }

    fn analyse(p: &Project, k: usize) -> (ImpactMatrix, InfluenceMatrix) {
        let a = build_matrix(p).unwrap();
        let t = total_influence_series(&a, k).unwrap();
        (a, t)
    }

    fn defaults(target: &str) -> DecisionFunctions {
        CriticalityConfig::default().resolve(&[TargetIndicator::new(target)])
    }

    #[test]
    fn relevance_examples() {
        let range = PermittedRange::interval("x", 3.0, 7.0);
        assert_eq!(relevance(&Indicator::quantitative("x", 5.0), &range).unwrap(), 0.0);
        assert_eq!(relevance(&Indicator::quantitative("x", 9.0), &range).unwrap(), 0.5);
        assert_eq!(relevance(&Indicator::quantitative("x", 100.0), &range).unwrap(), 1.0);
        assert_eq!(relevance(&Indicator::quantitative("x", 2.0), &range).unwrap(), 0.25);
        let labels = PermittedRange::labels("q", ["good", "satisfactory"]);
        assert_eq!(relevance(&Indicator::qualitative("q", "poor"), &labels).unwrap(), 1.0);
        assert_eq!(relevance(&Indicator::qualitative("q", "good"), &labels).unwrap(), 0.0);
    }

    #[test]
    fn relevance_degenerate_interval_uses_magnitude_scale() {
        let range = PermittedRange::interval("x", 4.0, 4.0);
        assert_eq!(relevance(&Indicator::quantitative("x", 5.0), &range).unwrap(), 0.25);
        let range = PermittedRange::interval("x", 0.0, 0.0);
        assert_eq!(relevance(&Indicator::quantitative("x", 0.5), &range).unwrap(), 0.5);
    }

    #[test]
    fn relevance_rejects_kind_mismatch() {
        let range = PermittedRange::interval("q", 0.0, 1.0);
        assert_eq!(
            relevance(&Indicator::qualitative("q", "good"), &range),
            Err(Error::KindMismatch("q".into()))
        );
        let other = PermittedRange::interval("z", 0.0, 1.0);
        assert!(relevance(&Indicator::quantitative("q", 0.5), &other).is_err());
    }

    #[test]
    fn criticality_examples() {
        let f = defaults("t");
        assert_eq!(criticality(0.8, &f, "t").unwrap(), CriticalityLevel::Critical);
        assert_eq!(criticality(-0.1, &f, "t").unwrap(), CriticalityLevel::Negligible);
        assert_eq!(criticality(0.5, &f, "t").unwrap(), CriticalityLevel::Significant);
        assert_eq!(criticality(0.25, &f, "t").unwrap(), CriticalityLevel::Moderate);
        assert_eq!(criticality(-0.75, &f, "t").unwrap(), CriticalityLevel::Critical);
        assert_eq!(criticality(1.7, &f, "t").unwrap(), CriticalityLevel::Critical);
        assert_eq!(criticality(0.1, &f, "u"), Err(Error::UnknownTarget("u".into())));
    }

    #[test]
    fn per_target_overrides_apply() {
        let mut config = CriticalityConfig::default();
        config.per_target.insert(
            "u".into(),
            Thresholds { critical: 0.3, significant: 0.2, moderate: 0.1 },
        );
        let f = config.resolve(&[TargetIndicator::new("t"), TargetIndicator::new("u")]);
        assert_eq!(f.len(), 2);
        assert_eq!(criticality(0.35, &f, "u").unwrap(), CriticalityLevel::Critical);
        assert_eq!(criticality(0.35, &f, "t").unwrap(), CriticalityLevel::Moderate);
    }

    #[test]
    fn threshold_ordering_is_validated() {
        assert!(Thresholds::default().is_ordered());
        assert!(!Thresholds { critical: 0.5, significant: 0.5, moderate: 0.25 }
            .is_ordered());
        assert!(!Thresholds { critical: 0.7, significant: 0.5, moderate: 0.0 }
            .is_ordered());
    }

    #[test]
    fn assess_all_zero_case() {
        let mut p = Project::new("z");
        p.indicators = vec![Indicator::quantitative("a", 5.0)];
        p.targets = vec![TargetIndicator::new("t")];
        p.ranges = vec![PermittedRange::interval("a", 3.0, 7.0)];
        let (a, t) = analyse(&p, 2);
        let out = assess(&p, &a, &t).unwrap();
        assert_eq!(
            out,
            vec![IndicatorAssessment {
                indicator_id: "a".into(),
                relevance: 0.0,
                direct_impact: vec![0.0],
                total_impact: vec![0.0],
                criticality: vec![CriticalityLevel::Negligible],
            }]
        );
    }

    #[test]
    fn assess_chain_uses_propagated_total() {
        let p = chain_project();
        let (a, t) = analyse(&p, 2);
        let out = assess(&p, &a, &t).unwrap();
        let first = &out[0];
        assert_eq!(first.indicator_id.as_str(), "a");
        assert!((first.direct_impact[0] - 0.2).abs() < 1e-15);
        assert!((first.total_impact[0] - 0.4).abs() < 1e-15);
        assert_eq!(first.criticality, vec![CriticalityLevel::Moderate]);
    }

    #[test]
    fn assess_relevance_independent_of_impacts() {
        let mut p = chain_project();
        p.indicators[0].current_value = IndicatorValue::Number(9.0);
        let (a, t) = analyse(&p, 3);
        assert_eq!(assess(&p, &a, &t).unwrap()[0].relevance, 0.5);
        p.estimates.clear();
        let (a, t) = analyse(&p, 3);
        assert_eq!(assess(&p, &a, &t).unwrap()[0].relevance, 0.5);
    }

    #[test]
    fn assess_rejects_foreign_matrix() {
        let p = chain_project();
        let mut other = chain_project();
        other.indicators.push(Indicator::quantitative("c", 5.0));
        other.ranges.push(PermittedRange::interval("c", 3.0, 7.0));
        let (a, t) = analyse(&other, 2);
        assert_eq!(assess(&p, &a, &t), Err(Error::DimensionMismatch));
    }

    #[test]
    fn rating_orders_by_magnitude() {
        let mut p = chain_project();
        p.estimates = vec![
            ImpactEstimate::new("e1", "a", "t", 0.3),
            ImpactEstimate::new("e1", "b", "t", -0.8),
        ];
        let (a, t) = analyse(&p, 3);
        let r = rating(&p, &a, &t, "t").unwrap();
        assert_eq!(r.rank_of("b"), Some(1));
        assert_eq!(r.rank_of("a"), Some(2));
        assert_eq!(r.entry("b").unwrap().criticality, CriticalityLevel::Critical);
    }

    #[test]
    fn rating_ties_fall_back_to_relevance_then_id() {
        let mut p = chain_project();
        p.estimates.clear();
        let (a, t) = analyse(&p, 3);
        let r = rating(&p, &a, &t, "t").unwrap();
        let ids: Vec<&str> = r.entries.iter().map(|e| e.indicator_id.as_str()).collect();
        assert_eq!(ids, ["a", "b"]);

        // b deviates more from its range, so it wins the tie.
        p.indicators[0].current_value = IndicatorValue::Number(3.0);
        p.indicators[1].current_value = IndicatorValue::Number(7.0 + 2.8);
        p.estimates = vec![
            ImpactEstimate::new("e1", "a", "t", 0.5),
            ImpactEstimate::new("e1", "b", "t", 0.5),
        ];
        let (a, t) = analyse(&p, 3);
        let r = rating(&p, &a, &t, "t").unwrap();
        assert_eq!(r.rank_of("b"), Some(1));
        assert!((r.entry("b").unwrap().relevance - 0.7).abs() < 1e-12);
    }

    #[test]
    fn rating_unknown_target_is_error() {
        let p = chain_project();
        let (a, t) = analyse(&p, 3);
        assert_eq!(rating(&p, &a, &t, "zz"), Err(Error::UnknownTarget("zz".into())));
        assert_eq!(rating(&p, &a, &t, "a"), Err(Error::UnknownTarget("a".into())));
    }

    #[test]
    fn ratings_for_all_targets_agree_across_strategies() {
        let mut p = chain_project();
        p.targets.push(TargetIndicator::new("u"));
        p.estimates.push(ImpactEstimate::new("e1", "b", "u", -0.9));
        let (a, t) = analyse(&p, 3);
        let seq = ratings(&p, &a, &t, Exec::Sequential).unwrap();
        let par = ratings(&p, &a, &t, Exec::Parallel).unwrap();
        assert_eq!(seq, par);
        assert_eq!(seq.len(), 2);
        assert_eq!(seq[1], rating(&p, &a, &t, "u").unwrap());
    }

    #[test]
    fn what_if_examples() {
        let p = chain_project();
        let (_, t) = analyse(&p, 3);
        let zero = what_if(&p, &t, &Scenario::new()).unwrap();
        assert!(zero.deltas.values().all(|&d| d == 0.0));
        assert_eq!(zero.deltas.len(), 3);

        let out = what_if(&p, &t, &Scenario::from([("a".into(), 2.0)])).unwrap();
        assert!((out.deltas["t"] - 0.8).abs() < 1e-15);
        assert!((out.deltas["b"] - 1.0).abs() < 1e-15);
        assert_eq!(out.deltas["a"], 2.0);
    }

    #[test]
    fn what_if_single_edge() {
        let mut p = Project::new("edge");
        p.indicators = vec![Indicator::quantitative("a", 1.0)];
        p.targets = vec![TargetIndicator::new("t")];
        p.ranges = vec![PermittedRange::interval("a", 0.0, 2.0)];
        p.estimates = vec![ImpactEstimate::new("e1", "a", "t", 0.5)];
        let (_, t) = analyse(&p, 2);
        let out = what_if(&p, &t, &Scenario::from([("a".into(), 1.0)])).unwrap();
        assert_eq!(out.deltas["t"], 0.5);
        assert_eq!(out.deltas["a"], 1.0);
    }

    #[test]
    fn what_if_rejects_bad_keys() {
        let p = chain_project();
        let (_, t) = analyse(&p, 3);
        assert_eq!(
            what_if(&p, &t, &Scenario::from([("t".into(), 1.0)])),
            Err(Error::TargetShock("t".into()))
        );
        assert_eq!(
            what_if(&p, &t, &Scenario::from([("x".into(), 1.0)])),
            Err(Error::UnknownIndicator("x".into()))
        );
        assert!(what_if(&p, &t, &Scenario::from([("a".into(), f64::NAN)])).is_err());
    }
}
