//! Multi-cell massive MIMO simulator for pilot assignment and power control.
//!
//! The pipeline for one Monte-Carlo drop is
//! [`geometry`] → [`assignment`] → [`power`] → [`link`], driven by
//! [`harness`]. [`config`] and [`output`] handle the file formats used by
//! the command-line tool.

pub mod assignment;
pub mod config;
pub mod error;
pub mod geometry;
pub mod harness;
pub mod link;
pub mod output;
pub mod power;
pub mod stats;

pub use assignment::{Metric, Objective, PaMethod, PilotAssignment};
pub use error::{Error, Result};
pub use harness::{CampaignConfig, DropResult, RateStatistics};
pub use link::{LinkModel, PowerAllocation, ScenarioConfig};
