//! Bounded-horizon planning with axioms.
//!
//! Loads grounded SAS+ tasks with derived variables, evaluates and validates
//! plans under stratified axiom semantics, and compiles k-step planning
//! models into ground answer-set programs and 0-1 integer programs. A small
//! branch-and-bound solver and a breadth-first oracle solve toy instances
//! internally; LP and ASP files are emitted for external solvers.

pub mod asp;
pub mod driver;
pub mod exec;
pub mod ip;
pub mod logic;
pub mod milp;
pub mod mip;
pub mod sas;
