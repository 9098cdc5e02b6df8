//! One module per subcommand; each exposes `run(args) -> Result<(), Failure>`.

pub mod convergence;
pub mod defect;
pub mod increments;
pub mod phase;
pub mod simulate;
pub mod table;
pub mod tableau;
