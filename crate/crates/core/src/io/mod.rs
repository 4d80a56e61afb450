//! Configuration files, output writers and the run driver.

mod manifest;
mod output;
mod run;
mod units;

pub use manifest::{
    emit_config, load_config, load_preset, parse_config, preset_names, preset_text, Output,
    RunManifest, DEFAULT_CUT_POINTS, DEFAULT_OUTPUT_DIR, DEFAULT_WINDOW, FORMAT_VERSION, PRESETS,
};
pub use output::{
    cut_csv, cut_dat, file_header, format_value, grid_csv, singles_csv, OutputDir, PARTIAL_SUFFIX,
};
pub use run::{
    reproduce_fig4, run, CutFit, HistogramInfo, Overrides, RunOutcome, SelfCheck, SourceResults,
    Summary, TiltReport, PERIOD_TOLERANCE, SCHEMA_VERSION, SUMMARY_FILE, TILT_TOLERANCE_ANALYTIC,
    TILT_TOLERANCE_DEGENERATE, TILT_TOLERANCE_HISTOGRAM,
};
pub use units::{format_length, parse_length};
