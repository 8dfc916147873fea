//! Self-synchronous stream cipher built by mixing two fixed-point logistic
//! map trajectories, plus the measurements and attacks used to study it.
//!
//! Layers, bottom up: [`fxchaos`] (exact fixed-point map), [`cipher`] (the
//! mixing state machine), [`keyspace`] (keys, seeds, key files),
//! [`framing`] (the `CHS1` container), [`analysis`] and [`attacks`].

pub mod analysis;
pub mod attacks;
pub mod cipher;
pub mod entropy;
pub mod error;
pub mod exec;
pub mod framing;
pub mod fxchaos;
pub mod keyspace;

pub use cipher::{cipher_init, CipherState, RoundPipeline};
pub use entropy::{EntropySource, FixedEntropy, SeededEntropy, SystemEntropy};
pub use error::{ContainerError, Error, KeyParseError, Result};
pub use exec::Execution;
pub use framing::{open, seal};
pub use fxchaos::{fx_from_rational, logistic_orbit, logistic_step, FxWord, Lambda};
pub use keyspace::{
    derive_xprime, keygen, parse_key, serialize_key, CipherKey, KeyParams, SessionSeed, XPrimeMode,
};
