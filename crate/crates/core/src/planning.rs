//! Strategic-planning taxonomy of municipal documents and the semantic
//! network of development management.

use std::collections::{BTreeMap, BTreeSet};

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::domain::{ensure_valid, Project};
use crate::error::{Error, Result};
use crate::influence::build_matrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlanningStage {
    TargetSetting,
    Forecasting,
    PlanningProgramming,
}

impl PlanningStage {
    pub const ALL: [PlanningStage; 3] = [
        PlanningStage::TargetSetting,
        PlanningStage::Forecasting,
        PlanningStage::PlanningProgramming,
    ];
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlanningHorizon {
    LongTerm,
    MediumTerm,
    ShortTerm,
}

impl PlanningHorizon {
    pub const ALL: [PlanningHorizon; 3] = [
        PlanningHorizon::LongTerm,
        PlanningHorizon::MediumTerm,
        PlanningHorizon::ShortTerm,
    ];
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DocumentKind {
    SedStrategy,
    LongTermSedForecast,
    LongTermBudgetProjection,
    MediumTermSedForecast,
    MunicipalProgram,
    StrategyImplementationPlan,
}

impl DocumentKind {
    pub const ALL: [DocumentKind; 6] = [
        DocumentKind::SedStrategy,
        DocumentKind::LongTermSedForecast,
        DocumentKind::LongTermBudgetProjection,
        DocumentKind::MediumTermSedForecast,
        DocumentKind::MunicipalProgram,
        DocumentKind::StrategyImplementationPlan,
    ];

    /// Only municipal programs may legitimately occur more than once.
    pub fn is_repeatable(self) -> bool {
        self == DocumentKind::MunicipalProgram
    }

    pub fn title(self) -> &'static str {
        match self {
            DocumentKind::SedStrategy => {
                "strategy for social and economic development of a municipal formation"
            }
            DocumentKind::LongTermSedForecast => {
                "long-term forecast of municipal social and economic development"
            }
            DocumentKind::LongTermBudgetProjection => {
                "long-term budget projection for the municipal formation"
            }
            DocumentKind::MediumTermSedForecast => {
                "medium-term forecast of municipal social and economic development"
            }
            DocumentKind::MunicipalProgram => "municipal programs",
            DocumentKind::StrategyImplementationPlan => {
                "plan of measures for the implementation of the municipal social and economic development strategy"
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DocumentRecord {
    pub kind: DocumentKind,
    pub title: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub adopted_on: Option<NaiveDate>,
}

impl DocumentRecord {
    pub fn new(kind: DocumentKind, title: &str) -> Self {
        Self {
            kind,
            title: title.to_owned(),
            adopted_on: None,
        }
    }
}

/// Documents required in one (stage, horizon) cell of the municipal
/// strategic-planning grid.
pub fn required_documents(stage: PlanningStage, horizon: PlanningHorizon) -> BTreeSet<DocumentKind> {
    use DocumentKind::*;
    use PlanningHorizon::*;
    use PlanningStage::*;

    let kinds: &[DocumentKind] = match (stage, horizon) {
        (TargetSetting, LongTerm) => &[SedStrategy],
        (Forecasting, LongTerm) => &[LongTermSedForecast, LongTermBudgetProjection],
        (Forecasting, MediumTerm) => &[MediumTermSedForecast],
        (PlanningProgramming, MediumTerm) => &[MunicipalProgram],
        (PlanningProgramming, ShortTerm) => &[StrategyImplementationPlan],
        _ => &[],
    };
    kinds.iter().copied().collect()
}

/// The (stage, horizon) cell a document kind belongs to.
pub fn cell_of(kind: DocumentKind) -> (PlanningStage, PlanningHorizon) {
    PlanningStage::ALL
        .iter()
        .flat_map(|&s| PlanningHorizon::ALL.iter().map(move |&h| (s, h)))
        .find(|&(s, h)| required_documents(s, h).contains(&kind))
        .expect("every document kind occupies one cell")
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoverageReport {
    pub missing: BTreeSet<DocumentKind>,
    pub duplicates: BTreeSet<DocumentKind>,
}

impl CoverageReport {
    pub fn is_complete(&self) -> bool {
        self.missing.is_empty() && self.duplicates.is_empty()
    }
}

pub fn portfolio_coverage(documents: &[DocumentRecord]) -> CoverageReport {
    let mut counts: BTreeMap<DocumentKind, usize> = BTreeMap::new();
    for doc in documents {
        *counts.entry(doc.kind).or_default() += 1;
    }
    CoverageReport {
        missing: DocumentKind::ALL
            .iter()
            .copied()
            .filter(|k| !counts.contains_key(k))
            .collect(),
        duplicates: counts
            .into_iter()
            .filter(|&(kind, n)| n > 1 && !kind.is_repeatable())
            .map(|(kind, _)| kind)
            .collect(),
    }
}

/// Version of the semantic-network schema produced by
/// [`build_semantic_network`].
pub const NETWORK_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeType {
    MunicipalFormation,
    MfType,
    SedLevel,
    RuralSettlementCount,
    Strategy,
    Indicator,
    TargetIndicator,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EdgeType {
    DependsOn,
    EvaluatedBy,
    DeterminedByDm,
    Influences,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetworkNode {
    pub id: String,
    pub node_type: NodeType,
    pub label: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkEdge {
    pub from: String,
    pub to: String,
    pub edge_type: EdgeType,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weight: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SemanticNetwork {
    pub schema_version: u32,
    pub nodes: Vec<NetworkNode>,
    pub edges: Vec<NetworkEdge>,
}

const MF: &str = "mf";
const MF_TYPE: &str = "mf_type";
const SED_LEVEL: &str = "sed_level";
const RURAL_COUNT: &str = "rural_settlement_count";
const STRATEGY: &str = "strategy";

fn indicator_node(id: &str) -> String {
    format!("indicator:{id}")
}

fn target_node(id: &str) -> String {
    format!("target:{id}")
}

/// Typed network: the strategy depends on the formation type, the current
/// development level and the number of rural settlements; the level is
/// evaluated by DM-selected indicators, which influence each other and the
/// targeted indicators.
pub fn build_semantic_network(project: &Project) -> Result<SemanticNetwork> {
    ensure_valid(project)?;
    let impact = build_matrix(project)?;
    let profile = &project.profile;

    let node = |id: &str, node_type, label: String| NetworkNode {
        id: id.to_owned(),
        node_type,
        label,
    };
    let edge = |from: &str, to: &str, edge_type| NetworkEdge {
        from: from.to_owned(),
        to: to.to_owned(),
        edge_type,
        weight: None,
    };

    let mut nodes = vec![
        node(MF, NodeType::MunicipalFormation, project.id.clone()),
        node(MF_TYPE, NodeType::MfType, profile.mf_type.to_string()),
        node(SED_LEVEL, NodeType::SedLevel, profile.sed_level.to_string()),
        node(RURAL_COUNT, NodeType::RuralSettlementCount, profile.rural_settlement_count.to_string()),
        node(STRATEGY, NodeType::Strategy, format!("SED strategy of {}", project.id)),
    ];
    let mut edges = vec![
        edge(STRATEGY, MF_TYPE, EdgeType::DependsOn),
        edge(STRATEGY, SED_LEVEL, EdgeType::DependsOn),
        edge(STRATEGY, RURAL_COUNT, EdgeType::DependsOn),
    ];

    let n = impact.indicator_count();
    let order = impact.node_order();
    let mut indicators: Vec<_> = project.indicators.iter().collect();
    indicators.sort_by(|a, b| a.id.cmp(&b.id));
    for ind in indicators {
        let id = indicator_node(ind.id.as_str());
        nodes.push(node(&id, NodeType::Indicator, ind.name.clone()));
        edges.push(edge(SED_LEVEL, &id, EdgeType::EvaluatedBy));
        edges.push(edge(&id, MF, EdgeType::DeterminedByDm));
    }
    let mut targets: Vec<_> = project.targets.iter().collect();
    targets.sort_by(|a, b| a.id.cmp(&b.id));
    for t in targets {
        nodes.push(node(&target_node(t.id.as_str()), NodeType::TargetIndicator, t.name.clone()));
    }

    let node_id = |i: usize| {
        if i < n {
            indicator_node(order[i].as_str())
        } else {
            target_node(order[i].as_str())
        }
    };
    for (u, row) in impact.weights().rows().enumerate() {
        for (v, &w) in row.iter().enumerate() {
            if w != 0.0 {
                edges.push(NetworkEdge {
                    weight: Some(w),
                    ..edge(&node_id(u), &node_id(v), EdgeType::Influences)
                });
            }
        }
    }

    Ok(SemanticNetwork {
        schema_version: NETWORK_SCHEMA_VERSION,
        nodes,
        edges,
    })
}

/// Node types the development strategy depends on, in fixed order.
pub fn strategy_determinants(network: &SemanticNetwork) -> Result<Vec<NodeType>> {
    let strategy = network
        .nodes
        .iter()
        .find(|n| n.node_type == NodeType::Strategy)
        .ok_or_else(|| Error::MalformedNetwork("no strategy node".into()))?;
    let types: BTreeMap<&str, NodeType> = network
        .nodes
        .iter()
        .map(|n| (n.id.as_str(), n.node_type))
        .collect();
    let found: BTreeSet<NodeType> = network
        .edges
        .iter()
        .filter(|e| e.edge_type == EdgeType::DependsOn && e.from == strategy.id)
        .filter_map(|e| types.get(e.to.as_str()).copied())
        .collect();

    let expected = [NodeType::MfType, NodeType::SedLevel, NodeType::RuralSettlementCount];
    if let Some(missing) = expected.iter().find(|t| !found.contains(t)) {
        return Err(Error::MalformedNetwork(format!(
            "strategy does not depend on {missing:?}"
        )));
    }
    Ok(expected.to_vec())
}
