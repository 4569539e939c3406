//! Special functions and scalar solvers shared by every other module.

mod jet;
mod solve;
pub mod special;

pub use jet::Jet;
pub use solve::{find_root, maximize_concave, BoundaryHit, Bracket, Maximum};
pub use special::{digamma, ln_gamma, ln_gamma as log_gamma, rgamma, trigamma};
