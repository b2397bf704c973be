//! Path simulation, path functionals and Monte Carlo estimation.

pub mod functionals;
pub mod grid;
pub mod mc;
pub mod path;
pub mod rng;

pub use functionals::{functionals, FunctionalKind, FunctionalSample, FunctionalValues};
pub use grid::PathGrid;
pub use mc::{mc_tail, Lookahead, McEstimate, SimConfig};
pub use path::{simulate_path, SamplePath};
