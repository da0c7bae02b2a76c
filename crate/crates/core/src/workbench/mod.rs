//! Datasets, the sub-sampling cross-validation harness and report
//! emission, shared by the `gibbs` command-line tool.

mod crossval;
mod dataset;
mod report;

pub use crossval::{crossval, subsample, CrossvalReport, CrossvalRow, HoldoutTruth};
pub use dataset::{load_dataset, save_dataset, Dataset};
pub use report::{predict_report, PredictReport, PredictRow};
