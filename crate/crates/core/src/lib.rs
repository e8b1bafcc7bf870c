#![allow(clippy::needless_range_loop)]

pub mod character;
pub mod cli;
pub mod diagram;
pub mod error;
pub mod group;
pub mod hermite;
pub mod irs;
pub mod measure;
pub mod sampling;
pub mod scalar;
pub mod verify;

pub use diagram::{BratteliDiagram, Continuation, FinitePath, PathIndex, Step};
pub use error::{Error, Result};
pub use group::{ClopenSet, GroupElement, YoungSubgroupDescriptor};
pub use measure::{InvariantMeasure, MultiIndex};
pub use scalar::{Arithmetic, Num};
