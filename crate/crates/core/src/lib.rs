//! Partitioning a multi-resource edge node among service providers.
//!
//! Each SP receives a number of concurrent sessions; its users see an Erlang-B
//! loss system and are redirected to the cloud when it is full. The crate
//! maximizes the probability that a generic user is served at the edge with a
//! streaming submodular solver, and provides exact oracles, baselines, a
//! Monte Carlo validator and a sweep runner around it.

pub mod baselines;
pub mod config;
pub mod erlang;
pub mod error;
pub mod exact;
pub mod goldens;
pub mod model;
pub mod objective;
pub mod report;
pub mod simulate;
pub mod stream;
pub mod sweep;

pub use baselines::{effective_capacity, greedy_heuristic, proportional_allocation, HeuristicParams};
pub use config::{two_sp_edge_node, Config};
pub use erlang::{erlang_b, erlang_b_direct, served_prob, OfferedLoad};
pub use error::{Error, Result};
pub use exact::{solve_exact_erlang, solve_mdkp, solve_mdkp_linear, ExactSolution};
pub use model::{Allocation, Instance, ResourceKind, ResourcePool, SpProfile};
pub use objective::{eval_f, marginal_gain, ErlangObjective, ObjectiveValue, SessionVector};
pub use report::{solve, Algo, SolutionReport, SolveOptions};
pub use simulate::{simulate, HoldingTime, SimConfig, SimReport};
pub use stream::{solve_stream, ItemOrder, StreamSolution};
pub use sweep::{run_sweep, verify, SweepAxis, SweepSpec, SweepTable, VerifyReport};
