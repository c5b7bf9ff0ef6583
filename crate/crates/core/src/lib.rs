//! Decision support for municipal social and economic development.
//!
//! Expert estimates of how indicators move each other and the targeted
//! indicators are aggregated into a signed impact matrix, propagated into
//! total influence, and turned into criticality levels, per-target ratings
//! and what-if predictions. The [`planning`] module adds the strategic
//! document taxonomy and the semantic network of development management.
//!
//! Data-parallel loops (matrix products, per-target ratings) run on rayon
//! when the default `parallel` feature is enabled.

pub mod assessment;
pub mod domain;
pub mod engine;
pub mod error;
pub mod influence;
pub mod linalg;
pub mod planning;

pub use assessment::{
    assess, criticality, rating, ratings, relevance, what_if, CriticalityConfig, CriticalityLevel,
    DecisionFunctions, IndicatorAssessment, Rating, RatingEntry, Scenario, ScenarioOutcome,
    Thresholds,
};
pub use domain::{
    aggregate_estimates, classify_impact, validate_project, AggregationPolicy, ImpactDirection,
    ImpactEstimate, Indicator, IndicatorKind, IndicatorValue, MfType, MunicipalProfile, NodeId,
    Permitted, PermittedRange, Project, SedLevel, TargetIndicator, ValidationReport, Violation,
    ViolationCode,
};
pub use engine::{Analysis, InfluenceOptions, Method};
pub use error::{Error, Result};
pub use influence::{
    build_matrix, spectral_radius_estimate, total_influence_closed, total_influence_series,
    ImpactMatrix, InfluenceMatrix, InfluenceMethod,
};
pub use linalg::{Exec, SquareMatrix};
pub use planning::{
    build_semantic_network, portfolio_coverage, required_documents, strategy_determinants,
    CoverageReport, DocumentKind, DocumentRecord, PlanningHorizon, PlanningStage, SemanticNetwork,
};
