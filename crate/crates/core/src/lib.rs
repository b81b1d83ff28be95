//! Design of survivable optical core networks with dedicated path
//! protection, with and without XOR network coding of protection signals.
//!
//! The crate covers the whole pipeline: a network model with file formats
//! ([`model`]), disjoint path enumeration ([`pathing`]), the XOR algebra and
//! the codability rule ([`coding`]), the six design problems ([`design`]),
//! exact and heuristic solvers ([`solver`]), independent verification of
//! designs by failure simulation ([`verify`]) and the experiment harness
//! behind the `ncopt` binary ([`bench`]).
//!
//! ```
//! use ncopt::design::{build_instance, ProblemKind, ProblemMode};
//! use ncopt::scenarios;
//! use ncopt::solver::{solve_exact, SolverBudget};
//!
//! let (topology, demands) = scenarios::protected_pair(4);
//! let mode = ProblemMode::min_cost(ProblemKind::Rnca);
//! let instance = build_instance(&topology, &demands, mode, 4).unwrap();
//! let report = solve_exact(&instance, SolverBudget::default()).unwrap();
//! assert_eq!(report.solution.metrics.routing_cost, 5);
//! ```

pub mod bench;
pub mod coding;
pub mod design;
pub mod error;
pub mod model;
pub mod pathing;
pub mod scenarios;
pub mod solver;
pub mod verify;

pub use error::{Error, Result};
