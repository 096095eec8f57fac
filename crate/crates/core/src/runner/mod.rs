//! Config-driven scenarios, sweeps and their CSV/JSON artifacts.
//!
//! Grid points are independent and evaluated on a worker pool; results are
//! assembled by index so output files do not depend on the worker count.

mod config;
mod execute;
mod point;
mod presets;

pub use config::{
    ElectronBlock, Escalation, FeasibilityBlock, FidelityMapBlock, GatesBlock, LossBlock, ModelBlock, ScenarioConfig, ScenarioKind,
    SweepBlock, Velocity, SCHEMA_VERSION,
};
pub use execute::{
    base_point, execute, parallel_map, run_scenario, write_outputs, FidelityMap, MapEntry, Outcome, PointResult, SweepResult,
};
pub use point::{PointData, PointSpec};
pub use presets::{linspace, preset, PRESETS};
