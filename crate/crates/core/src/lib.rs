//! Finite-volume solver for pressureless and self-gravitating fluids built on
//! the delta-wave-projection Godunov scheme, with static and expanding
//! cosmological backgrounds.

pub mod background;
pub mod diagnostics;
pub mod error;
pub mod gravity;
pub mod grid;
pub mod io;
pub mod law;
pub mod orchestrator;
pub mod riemann;
pub mod scenarios;
pub mod state;
pub mod transport;

pub use background::Background;
pub use diagnostics::Diagnostics;
pub use error::{Error, Result};
pub use grid::{Boundary, Grid};
pub use law::StateLaw;
pub use state::FluidState;
