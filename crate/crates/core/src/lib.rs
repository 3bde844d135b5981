pub mod cli;
pub mod error;
pub mod families;
pub mod functionals;
pub mod grid;
pub mod maxent;
pub mod path;
pub mod quad;
pub mod spectral;
pub mod stable;
pub mod suite;
pub mod tolerances;
pub mod verify;

pub use error::{Error, Result};
pub use grid::{Grid, GridFunction};
pub use stable::StableLaw;
