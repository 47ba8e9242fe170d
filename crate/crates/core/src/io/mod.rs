//! Everything that touches files or the command line.

pub mod acf;
pub mod cli;
pub mod compare;
pub mod data;
pub mod json;
pub mod model_file;

pub use acf::{acf_ccf, CorrelationTable};
pub use compare::{compare_models, evaluate_origin, model_label, rolling_crps, ComparisonReport, ComparisonRow};
pub use data::{load_series, returns_from_prices, write_series_csv, InputKind, PriceTable};
pub use model_file::{ModelFile, Provenance, FORMAT_VERSION};
