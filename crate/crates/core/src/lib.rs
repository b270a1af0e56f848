//! Monte Carlo estimation of logical error rates for concatenated
//! error-detecting and error-correcting codes, and resource planning on top.

pub mod circuit;
pub mod codes;
pub mod constants;
pub mod decoders;
pub mod error;
pub mod estimator;
pub mod fit;
pub mod frame;
pub mod gadgets;
pub mod gf2;
pub mod noise;
pub mod pauli;
pub mod planner;
pub mod sim;
pub mod tableau;

pub use circuit::{Basis, Circuit, Gate1, Location, LocationKind, Op, Qubit, Signal};
pub use decoders::{DecoderKind, Outcome};
pub use error::{Error, Result};
pub use noise::{GammaModel, NoiseParams};
pub use pauli::{Letter, PauliOperator};
pub use gadgets::{CodeSpec, CompileOptions, Family, GadgetCircuit, IdlePolicy, SteanePrep, Variant};
