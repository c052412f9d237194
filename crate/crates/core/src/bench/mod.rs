//! Benchmarks: synthetic attributed networks, the office toy network,
//! scaling graphs, and evaluation metrics.

mod metrics;
mod scaling;
mod synthetic;
mod toy;

pub use metrics::{evaluate, pr_auc, prf1, random_baseline, roc_auc, Classification, EvalResult};
pub use scaling::preferential_attachment;
pub use synthetic::{generate_synthetic, inject_anomalies, AttributeModel, Family, SyntheticConfig, SyntheticNetwork};
pub use toy::{office_network, OfficeConfig, OfficeNetwork, COMMUNITY_NAMES};
