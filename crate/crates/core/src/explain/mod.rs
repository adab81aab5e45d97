//! Permutation and perturbation feature importance for clusterings.
//!
//! * [`g2pc`]: permute one feature group across all samples, reassign, and
//!   record the fraction of samples whose cluster changed.
//! * [`l2pc`]: for one sample, swap in a feature group taken from M other
//!   samples and record the fraction of duplicates that changed cluster.
//! * [`permutation_feature_importance`]: the supervised original, relative
//!   performance change after permuting a feature.
//!
//! Every (group, repeat) or (sample, group, repeat) cell draws from its own
//! random substream, so results do not depend on the rayon pool size.

mod g2pc;
mod l2pc;
mod pfi;
mod summary;

pub use g2pc::{g2pc, G2pcResult};
pub use l2pc::{l2pc, l2pc_global, L2pcResult};
pub use pfi::{accuracy, permutation_feature_importance, PfiResult};
pub use summary::{summarize, write_summary_csv, GroupSummary, GroupValues};

/// Default repeat count K.
pub const DEFAULT_REPEATS: usize = 100;
/// Default perturbations per repeat M.
pub const DEFAULT_PERTURBATIONS: usize = 30;

use crate::clustering::FittedClusterer;
use crate::error::{Error, Result};

pub(crate) fn ensure_not_all_noise(model: &FittedClusterer) -> Result<()> {
    if model.train_labels().is_all_noise() {
        return Err(Error::AllNoiseModel);
    }
    Ok(())
}

pub(crate) fn ensure_repeats(repeats: usize) -> Result<()> {
    if repeats == 0 {
        return Err(Error::InvalidParameter("repeat count K must be at least 1".into()));
    }
    Ok(())
}
