//! Experiment harness: stream generators, offline oracles, experiment runs
//! and the self-test checks.

pub mod checks;
pub mod experiments;
pub mod offline;
pub mod streams;

pub use offline::{
    best_compression_loss, interval_regret, offline_oracle, offline_oracle_constrained, pca_interval_regret,
    FollowTheLeaderPca, OracleResult,
};
pub use streams::{
    gen_adversarial_stream, gen_dispatch_stream, gen_jump_stream, gen_permutation_stream, gen_quadratic_stream,
    gen_subspace_stream, gen_toy_stream, read_demand_csv, substream, synthetic_demand, DispatchModel,
};
pub use experiments::{run_experiment, ExperimentConfig, ExperimentId, ExperimentOutput, SummaryRow, TraceRow};
