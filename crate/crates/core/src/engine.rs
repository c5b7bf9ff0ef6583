//! One-call analysis pipeline shared by every front end.

use serde::{Deserialize, Serialize};

use crate::assessment::{self, IndicatorAssessment, Rating, Scenario, ScenarioOutcome};
use crate::domain::Project;
use crate::error::Result;
use crate::influence::{self, ImpactMatrix, InfluenceMatrix};
use crate::linalg::Exec;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    #[default]
    Series,
    Closed,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct InfluenceOptions {
    pub method: Method,
    /// Series length; `None` means one step per node.
    pub k: Option<usize>,
}

/// A project together with its impact and total-influence matrices.
#[derive(Debug, Clone)]
pub struct Analysis<'p> {
    project: &'p Project,
    impact: ImpactMatrix,
    influence: InfluenceMatrix,
}

impl<'p> Analysis<'p> {
    pub fn new(project: &'p Project, options: InfluenceOptions) -> Result<Self> {
        let impact = influence::build_matrix(project)?;
        let influence = match options.method {
            Method::Series => {
                let k = options.k.unwrap_or_else(|| impact.default_series_length());
                influence::total_influence_series(&impact, k)?
            }
            Method::Closed => influence::total_influence_closed(&impact)?,
        };
        Ok(Self {
            project,
            impact,
            influence,
        })
    }

    pub fn project(&self) -> &Project {
        self.project
    }

    pub fn impact(&self) -> &ImpactMatrix {
        &self.impact
    }

    pub fn influence(&self) -> &InfluenceMatrix {
        &self.influence
    }

    pub fn assess(&self) -> Result<Vec<IndicatorAssessment>> {
        assessment::assess(self.project, &self.impact, &self.influence)
    }

    pub fn rating(&self, target_id: &str) -> Result<Rating> {
        assessment::rating(self.project, &self.impact, &self.influence, target_id)
    }

    pub fn ratings(&self, exec: Exec) -> Result<Vec<Rating>> {
        assessment::ratings(self.project, &self.impact, &self.influence, exec)
    }

    pub fn what_if(&self, scenario: &Scenario) -> Result<ScenarioOutcome> {
        assessment::what_if(self.project, &self.influence, scenario)
    }
}
