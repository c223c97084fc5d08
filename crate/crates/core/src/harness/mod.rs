//! Monte Carlo MSE engine and the figure presets.
//!
//! Every preset produces [`Artifact`]s: a CSV table plus a JSON metadata
//! sidecar. Neither contains timestamps, host details or the worker
//! count, so reruns with the same seed are byte-identical.

mod diagonal;
mod mse;
mod output;
mod presets;

pub use diagonal::DiagonalRange;
pub use mse::{
    monte_carlo, run_mse, ExperimentConfig, InputModel, Moments, MseReport, MseRow, SnrGrid, Transmitter, CHUNK,
};
pub use output::{csv_string, Artifact, RunMetadata};
pub use presets::{
    preset_cc_vs_majority, preset_constellations, preset_mse_modulations, preset_quantization, preset_tradeoff,
    run_preset, ConstellationCell, ConstellationRow, Preset, PresetOptions, QuantizationRow, QuantizationScheme,
    TradeoffRow,
};
