//! Label-free assessment of encoder feature pyramids.
//!
//! The crate scores each output stride of an encoder along two axes:
//! structural coherence (how well features form spatially coherent,
//! cluster-separable regions) and edge fidelity (how tightly feature
//! responses follow image boundaries). Per-stride profiles of two encoders
//! are then turned into a master/auxiliary fusion plan.
//!
//! Everything here is pure computation over in-memory buffers. File formats,
//! reports and the command line live in the `feature-probe` crate.

#![no_std]

extern crate alloc;

mod error;
mod flags;

pub mod ef;
pub mod image_ops;
pub mod numerics;
pub mod oracle;
pub mod planner;
pub mod rng;
pub mod sc;
pub mod synth;
pub mod tensor;
pub mod validation;

pub use error::{Error, Result};
pub use flags::Flag;
pub use tensor::{EncoderFeatureSet, FeatureTensor, LabelMap, STRIDES};
