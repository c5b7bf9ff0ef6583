//! One canonical JSON file per project under a data directory, with
//! optimistic concurrency on the project revision.

use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};

use munidss_core::{validate_project, ImpactEstimate, Project};

use crate::error::{GatewayError, Result};
use crate::files::{load_project, project_to_string, read_text, write_atomic};

#[derive(Debug)]
pub struct ProjectStore {
    dir: PathBuf,
    locks: Mutex<HashMap<String, Arc<Mutex<()>>>>,
}

fn check_id(id: &str) -> Result<()> {
    let ok = !id.is_empty()
        && !id.starts_with('.')
        && id
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.'));
    if ok {
        Ok(())
    } else {
        Err(GatewayError::BadRequest(format!("invalid project id `{id}`")))
    }
}

impl ProjectStore {
    /// Opens a store over an existing, writable directory.
    pub fn open(dir: impl Into<PathBuf>) -> Result<Self> {
        let dir = dir.into();
        let meta = std::fs::metadata(&dir).map_err(|e| GatewayError::io(&dir, e))?;
        if !meta.is_dir() {
            return Err(GatewayError::io(
                &dir,
                std::io::Error::new(std::io::ErrorKind::NotADirectory, "not a directory"),
            ));
        }
        // Probe writability up front rather than on the first PUT.
        tempfile::tempfile_in(&dir).map_err(|e| GatewayError::io(&dir, e))?;
        Ok(Self {
            dir,
            locks: Mutex::new(HashMap::new()),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn path_of(&self, id: &str) -> PathBuf {
        self.dir.join(format!("{id}.json"))
    }

    fn lock_for(&self, id: &str) -> Arc<Mutex<()>> {
        let mut locks = self.locks.lock().unwrap_or_else(|e| e.into_inner());
        locks.entry(id.to_owned()).or_default().clone()
    }

    fn read(&self, id: &str) -> Result<Option<Project>> {
        let path = self.path_of(id);
        if !path.exists() {
            return Ok(None);
        }
        load_project(&read_text(&path)?).map(Some)
    }

    /// Snapshot of the stored project.
    pub fn get(&self, id: &str) -> Result<Project> {
        check_id(id)?;
        self.read(id)?
            .ok_or_else(|| GatewayError::NotFound(id.to_owned()))
    }

    /// Replaces (or creates) a project. `project.revision` must equal the
    /// stored revision, with 0 standing for "does not exist yet". The stored
    /// copy gets the next revision.
    pub fn put(&self, id: &str, mut project: Project) -> Result<Project> {
        check_id(id)?;
        if project.id != id {
            return Err(GatewayError::BadRequest(format!(
                "body id `{}` does not match path id `{id}`",
                project.id
            )));
        }
        let lock = self.lock_for(id);
        let _guard = lock.lock().unwrap_or_else(|e| e.into_inner());
        let current = self.read(id)?.map_or(0, |p| p.revision);
        if project.revision != current {
            return Err(GatewayError::Conflict {
                current,
                supplied: project.revision,
            });
        }
        project.revision = current + 1;
        self.write(&project)?;
        Ok(project)
    }

    /// Inserts or replaces estimates keyed by (expert, source, sink).
    pub fn upsert_estimates(
        &self,
        id: &str,
        expected_revision: Option<u64>,
        estimates: Vec<ImpactEstimate>,
    ) -> Result<Project> {
        check_id(id)?;
        let lock = self.lock_for(id);
        let _guard = lock.lock().unwrap_or_else(|e| e.into_inner());
        let mut project = self
            .read(id)?
            .ok_or_else(|| GatewayError::NotFound(id.to_owned()))?;
        if let Some(supplied) = expected_revision {
            if supplied != project.revision {
                return Err(GatewayError::Conflict {
                    current: project.revision,
                    supplied,
                });
            }
        }
        for estimate in estimates {
            let existing = project.estimates.iter_mut().find(|e| {
                e.expert_id == estimate.expert_id
                    && e.source == estimate.source
                    && e.sink == estimate.sink
            });
            match existing {
                Some(slot) => *slot = estimate,
                None => project.estimates.push(estimate),
            }
        }
        project.revision += 1;
        self.write(&project)?;
        Ok(project)
    }

    fn write(&self, project: &Project) -> Result<()> {
        let report = validate_project(project);
        if !report.is_valid() {
            return Err(GatewayError::Invalid(report));
        }
        let text = project_to_string(project)?;
        write_atomic(&self.path_of(&project.id), text.as_bytes())
    }
}
