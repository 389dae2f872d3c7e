//! Delayed sampling: random variables are kept symbolic while closed-form
//! conjugate updates apply, and drawn only when a concrete value is needed.

pub mod conjugacy;
pub mod copy;
pub mod graph;
pub mod handler;
pub mod node;
pub mod sym;

pub use conjugacy::Conditional;
pub use copy::{dump, needs_copy, Copier};
pub use graph::{distribution_of, node_distribution, Graph, Variant};
pub use handler::{output_distribution, DsHandler};
pub use node::{Family, NodeRef, Status};
pub use sym::SymExpr;
