use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid {name} = {value}: {reason}")]
    InvalidInput {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    /// The available vertical beamwidth already covers the user region, so
    /// there is no boresight range to scan over.
    #[error("no beam scan needed: required vertical angle {required} rad <= beamwidth {beamwidth} rad")]
    NoScanNeeded { required: f64, beamwidth: f64 },

    #[error("distance {0} m is below the 1 m close-in reference distance")]
    BelowReferenceDistance(f64),

    #[error("cannot select users from an empty gain list")]
    EmptyGains,

    #[error("population has {users} users but {gains} gains were supplied")]
    GainCountMismatch { users: usize, gains: usize },

    #[error("thread pool: {0}")]
    ThreadPool(String),
}

pub(crate) fn ensure(cond: bool, name: &'static str, value: f64, reason: &'static str) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::InvalidInput {
            name,
            value,
            reason,
        })
    }
}
