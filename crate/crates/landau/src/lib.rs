pub mod error;
pub mod evolution;
pub mod fd;
pub mod fft;
pub mod geometry;
pub mod kernel;
pub mod linalg;
pub mod norms;
pub mod operators;
pub mod phase_space;
pub mod picard;
pub mod projection;
pub mod random;
pub mod selling;
pub mod sym3;
pub mod verify;

pub use error::{Error, Result};
