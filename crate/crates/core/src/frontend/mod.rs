//! Query language, data files and plan output.

mod load;
mod parse;
mod plan;
mod print;

pub use load::{format_output, load_factor_table, load_instance, parse_factor_table};
pub use parse::parse_query;
pub use plan::{emit_plan, plan_rules, PlanRule, RuleKind};
pub use print::print_query;
