use thiserror::Error;

/// Errors raised by the simulator.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("intensity threshold {threshold:e} W/cm^2 is never crossed on the rising edge (peak {peak:e} W/cm^2)")]
    NoCrossing { threshold: f64, peak: f64 },

    #[error("non-finite field or momentum at t = {time} (normalized units)")]
    Propagation { time: f64 },

    #[error("trajectory endpoint is still accelerating (|dbeta/dt| = {accel:e} at the {end} end); request an apodization window or extend the trajectory")]
    EndpointArtifact { end: &'static str, accel: f64 },

    #[error("phase-space box holds only {mass:.6} of the state's probability (need >= 0.99)")]
    Coverage { mass: f64 },

    #[error("cannot sample: the Wigner function is negative in some phase-space region, so it is not a probability density")]
    NegativeWigner,

    #[error("sample {index}: {source}")]
    Sample {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}

pub(crate) fn config<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Config(msg.into()))
}
