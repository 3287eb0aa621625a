pub mod cohen;
pub mod error;
pub mod linalg;
pub mod operator;
pub mod phase;
pub mod stft;
pub mod verify;
pub mod weights;
pub mod wire;

pub use error::{Error, Result};
pub use phase::{PhaseField, PhasePoint, Signal, VecPhaseField, C64};
