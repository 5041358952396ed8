//! Scenario configs, seeded instance generation, experiment execution, and
//! result emission.

pub mod experiment;
pub mod generate;
pub mod scenario;

pub use experiment::{
    demo_example1, run_experiment, run_oracle, run_sweep, run_verification, ExitStatus,
    ExperimentOutput, Summary,
};
pub use generate::generate_instances;
pub use scenario::{
    load_scenario, AgentSpec, GridSpec, InstanceSpec, Mode, PropertyName, Scenario, StrategySpec,
    TypesSpec, VerifySpec,
};
