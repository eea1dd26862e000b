//! Single-step generation of pure quantum states from reuploaded classical
//! noise.
//!
//! A data-reuploading circuit maps a scalar noise sample to a pure state; its
//! angles are trained with Adam so that the generated ensemble matches a target
//! ensemble under an entropic optimal-transport loss built on the infidelity
//! cost `1 − |⟨φ|ψ⟩|`.

pub mod datasets;
pub mod ensemble;
pub mod error;
pub mod generator;
pub mod gradients;
pub mod metrics;
pub mod rng;
pub mod statevec;
pub mod training;
pub mod transport;

pub use ensemble::PureEnsemble;
pub use error::{Error, Result};
pub use generator::{generate_ensemble, generate_state, GeneratorConfig, NoiseSample, ThetaTensor};
pub use statevec::{EntanglerTopology, EulerAngles, StateVector, C64};
pub use transport::SinkhornConfig;
