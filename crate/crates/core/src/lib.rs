//! Functional aggregate queries over commutative semirings, evaluated by
//! variable elimination with worst-case optimal joins.

pub mod algebra;
pub mod engine;
pub mod error;
pub mod exec;
pub mod factor;
pub mod frontend;
pub mod hypergraph;
pub mod lp;
pub mod optimizer;
pub mod oracle;
pub mod ordering;
pub mod query;
pub mod random;
pub mod reductions;
pub mod wcoj;

pub use error::{FaqError, Result};
pub use exec::Execution;
