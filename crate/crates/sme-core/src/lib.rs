//! Set-membership identification of linear systems under bounded
//! disturbances. The uncertainty set is a product of per-row polytopes, each
//! maintained in halfspace form and queried through a built-in dense simplex
//! kernel.

pub mod error;
pub mod lp;
pub mod polytope;
pub mod regression;
pub mod set;

pub use error::SmeError;
pub use lp::{solve_inequalities, solve_standard, IneqProblem, LpError, LpOutcome};
pub use polytope::{Halfspace, RowPolytope, Support};
pub use regression::{estimate_wmax_lower, ucb_delta, ucb_sme_fit, UcbFit, WmaxFit};
pub use set::{direction_set, DiameterMethod, DiameterReport, MembershipSet};
