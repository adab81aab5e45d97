//! Algorithm-agnostic feature importance for clustering.
//!
//! Fit a clustering backend, then ask how much each feature group drives
//! cluster assignment: globally by permuting a group across all samples
//! ([`explain::g2pc`]), or locally by swapping one sample's group for values
//! from other samples ([`explain::l2pc`]).
//!
//! ```
//! use cluster_explain::prelude::*;
//!
//! let (data, _truth) = generate(&SyntheticSpec::dataset_one(), RandomSeed(7)).unwrap();
//! let model = fit(&ClusterParams::kmeans(2), &data, RandomSeed(7)).unwrap();
//! let grouping = FeatureGrouping::identity(data.n_features()).unwrap();
//! let result = g2pc(&model, &data, &grouping, 20, RandomSeed(7)).unwrap();
//! assert_eq!(result.pct_change.len(), 5);
//! ```

pub mod baseline;
pub mod clustering;
pub mod connectivity;
pub mod data;
pub mod datagen;
pub mod error;
pub mod experiment;
pub mod explain;
pub mod rng;
pub mod stats;

pub use error::{Error, Result};

/// Common imports for examples and downstream code.
pub mod prelude {
    pub use crate::baseline::{nested_cv_effects, EffectReport, NestedCvConfig};
    pub use crate::clustering::{
        assign, fit, select_clusters, Algorithm, ClusterParams, FittedClusterer, SilhouetteReport,
    };
    pub use crate::connectivity::{connectivity_features, TimeSeriesPanel};
    pub use crate::data::{identity_grouping, ClusterAssignment, DataMatrix, FeatureGrouping, Label};
    pub use crate::datagen::{generate, generate_batch, SyntheticSpec};
    pub use crate::error::{Error, Result};
    pub use crate::explain::{
        accuracy, g2pc, l2pc, l2pc_global, permutation_feature_importance, summarize, G2pcResult,
        GroupSummary, GroupValues, L2pcResult, PfiResult,
    };
    pub use crate::rng::RandomSeed;
}
