//! Scenario configuration, the per-epoch protocol, Monte Carlo runs and
//! artifact output.

mod config;
mod monte_carlo;
mod output;
mod plot;
mod trial;

pub use config::{ScenarioConfig, Scheme, TruthModel};
pub use monte_carlo::{
    run_monte_carlo, splitmix64, summarize, trial_seed, PerEpoch, PerScheme, RunResult, RunSummary,
    SchemeSeries, SchemeTotals, SUMMARY_VERSION,
};
pub use output::{
    emit_outputs, parse_summary_json, parse_trace_csv, summary_json, trace_csv, Artifacts,
    CSV_HEADER,
};
pub use plot::{line_chart_svg, Series};
pub use trial::{run_trial, run_trial_inspected, BeliefInspector, EpochRecord, TrialOutcome};
