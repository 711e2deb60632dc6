//! Scenario files and tabular inputs.

mod scenario;
mod tables;

pub use scenario::{
    load_scenario, parse_scenario, serialize_scenario, ExplicitSchedule, ImpactModel, Metric,
    PublishedFigure, ReportOptions, ScenarioError, ScenarioFile, ValuationOptions, SCHEMA_VERSION,
};
pub use tables::{parse_rent_roll, parse_subsidy_table, TableError};
