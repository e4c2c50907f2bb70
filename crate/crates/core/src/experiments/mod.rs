//! Multi-seed scenarios: generation, averaging, theory overlays, fits and
//! the built-in figure presets.

pub mod fit;
pub mod output;
pub mod presets;
pub mod run;
pub mod scenario;
pub mod tables;

pub use fit::{fit_power_exponent, PowerFit};
pub use presets::{check_preset, check_theory, preset, Check, PRESET_NAMES};
pub use run::{
    fit_hypothesis_constant, run_scenario, run_scenario_with_workers, worker_count, FittedConstant,
    HypothesisRegime, ScenarioResult, WORKERS_ENV,
};
pub use scenario::{Output, ParamSpec, Scenario, Sweep};
pub use tables::{theory_tables, TheoryTable};
