//! Storage, command-line interface and HTTP service for the munidss
//! decision-support engine.

pub mod api;
pub mod cli;
pub mod error;
pub mod files;
pub mod render;
pub mod store;

pub use api::{router, serve, ApiError, ApiErrorCode, ServeConfig};
pub use error::{GatewayError, Result};
pub use files::{load_project, load_project_path, parse_project, save_project, ProjectFile};
pub use store::ProjectStore;
