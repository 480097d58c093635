//! Simulation of linear systems `x_{t+1} = A x_t + B u_t + w_t` under bounded
//! disturbances, plus disturbance-distribution primitives and excitation
//! diagnostics.

mod disturbance;
mod error;
mod model;
mod pe;
mod policy;
mod trajectory;

pub use disturbance::{DisturbanceKind, DisturbanceModel};
pub use error::SimError;
pub use model::SystemModel;
pub use pe::check_pe;
pub use policy::{InputPolicy, NominalCommand};
pub use trajectory::{simulate, Step, Trajectory};
