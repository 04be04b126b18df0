//! Small-noise switching dynamics of a first-order dc/dc buck converter.
//!
//! The converter current `x` follows a linear ODE with forcing in the ON
//! configuration and pure exponential decay in the OFF configuration. An
//! upcrossing of the threshold `x_ref` switches ON to OFF, and clock pulses
//! at integer times switch OFF back to ON. Pulses arriving while ON are
//! ignored.
//!
//! The crate covers:
//!
//! - [`params`]: model constants, their admissibility region and every
//!   closed-form constant derived from them.
//! - [`strobe`]: the stroboscopic map, its derivative and stable fixed point.
//! - [`det`]: the closed-form deterministic hybrid trajectory.
//! - [`sde`]: the noisy system with white noise on the ON forcing, sampled
//!   with exact Ornstein-Uhlenbeck transitions and Brownian-bridge passage
//!   detection.
//! - [`skorokhod`]: time deformations, their log-slope distortion and
//!   certified upper bounds on the Skorokhod distance between hybrid paths.
//! - [`flln`]: Monte Carlo checks of the Gaussian-tail bad-event bounds and
//!   of the decay of the Skorokhod distance as the noise vanishes.
//! - [`cli`]: configuration loading, artifact emission and subcommand
//!   dispatch behind the `buck-flln` binary.

pub mod cli;
pub mod det;
pub mod error;
pub mod flln;
pub mod output;
pub mod params;
pub mod sde;
pub mod skorokhod;
pub mod state;
pub mod strobe;

pub use det::{simulate_det, DetPath, DetSchedule};
pub use error::{Error, ParamError, Result, Violation};
pub use flln::{gaussian_tail, McConfig, McReport};
pub use params::{derive_constants, validate_params, ConverterParams, DerivedConstants};
pub use sde::{simulate_stoch, StochConfig, StochPath};
pub use skorokhod::{CadlagHybridPath, DistanceBound, TimeDeformation};
pub use state::{HybridState, Mode};
