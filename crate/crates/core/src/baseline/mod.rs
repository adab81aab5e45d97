//! Supervised baseline: elastic-net logistic regression with nested CV.

mod elastic_net;
mod nested_cv;

pub use elastic_net::{
    fit_elastic_net_logreg, fit_from, l1_kill_threshold, smooth_gradient, ElasticNetModel, MAX_ITER,
    OBJECTIVE_TOL,
};
pub use nested_cv::{
    binarize, group_effects, log_space, nested_cv_effects, roc_auc, EffectReport, FoldResult,
    NestedCvConfig, MAX_SPLIT_RETRIES,
};
