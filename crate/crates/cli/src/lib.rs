//! Scenario runner behind the `acml` binary.

pub mod bundled;
pub mod fdcheck;
pub mod report;
pub mod runner;
pub mod scenario;

pub use runner::{resolve, run_scenario, Report, RunOptions};
pub use scenario::{load_scenario, Scenario, ScenarioError, Task};
