//! Structure learning from several environments that share one linear SEM
//! and differ only in some noise variances.

mod baseline;
mod lre;
mod oracle;
mod skeleton;

pub use self::baseline::{
    baseline, baseline_from_invariance, change_finder, change_finder_from_moments, consistent_finder,
    estimate_change_sets, regression_invariance_set, regression_invariance_set_from_moments, BaselineOptions,
    BaselineOutput, PairSummary,
};
pub use self::lre::{
    lre, lre_from_essential, minimal_fixing_set, Conflict, ConflictKind, Decision, LreOptions, LreOutput, Rule,
};
pub use self::oracle::{InvarianceOracle, PopulationOracle, SampleOracle};
pub use self::skeleton::{estimate_skeleton, pc, pc_from_moments, PcResult, SkeletonOptions};
pub use crate::invariance::{ChangeSet, RegressionInvarianceSet, Scope};

use crate::error::{Error, Result};
use crate::sem::EnvironmentData;

/// All `(i, j)` with `i < j < m`.
pub fn env_pairs(m: usize) -> Vec<(usize, usize)> {
    (0..m).flat_map(|i| ((i + 1)..m).map(move |j| (i, j))).collect()
}

/// At least one environment, all with the same columns.
pub fn check_environments(envs: &[EnvironmentData]) -> Result<()> {
    let Some(first) = envs.first() else {
        return Err(Error::InvalidRequest("at least one environment is required".into()));
    };
    for e in &envs[1..] {
        if e.names() != first.names() {
            return Err(Error::Data {
                path: e.env_id().to_string(),
                message: format!(
                    "header [{}] does not match [{}] of {}",
                    e.names().join(","),
                    first.names().join(","),
                    first.env_id()
                ),
            });
        }
    }
    Ok(())
}
