//! Reference evaluator: folds the aggregates literally over every full
//! assignment. It shares no code with the engine beyond factor lookup.

use crate::algebra::Value;
use crate::error::{FaqError, Result};
use crate::exec::Execution;
use crate::factor::{Factor, Key};
use crate::query::Instance;

/// Maximum number of full assignments the oracle will enumerate.
pub const ASSIGNMENT_GUARD: u128 = 10_000_000;

/// Evaluates the query by enumeration. Each variable ranges over its
/// dictionary: the explicit domain if declared, else its active domain.
pub fn brute_force_eval(inst: &Instance, exec: Execution) -> Result<Factor> {
    let n = inst.num_vars();
    let f = inst.free_len();
    let sizes: Vec<usize> = (0..n).map(|v| inst.domain_size(v)).collect();
    let total = sizes
        .iter()
        .fold(1u128, |acc, &s| acc.saturating_mul(s as u128));
    if total > ASSIGNMENT_GUARD {
        return Err(FaqError::DomainExplosion(total));
    }
    let free_count: usize = sizes[..f].iter().product();
    let evaluator = Evaluator { inst, sizes: &sizes };
    let results = exec.map_range(free_count, |i| {
        let mut assignment = vec![0u32; n];
        let mut rest = i;
        for v in (0..f).rev() {
            assignment[v] = (rest % sizes[v]) as u32;
            rest /= sizes[v];
        }
        let value = evaluator.fold(f, &mut assignment);
        (assignment[..f].to_vec().into_boxed_slice(), value)
    });
    let rows: Vec<(Key, Value)> = results
        .into_iter()
        .filter(|(_, v)| !inst.ctx.is_zero(v))
        .collect();
    Ok(Factor::from_sorted((0..f).collect(), rows))
}

struct Evaluator<'a> {
    inst: &'a Instance,
    sizes: &'a [usize],
}

impl Evaluator<'_> {
    fn fold(&self, level: usize, assignment: &mut [u32]) -> Value {
        let ctx = &self.inst.ctx;
        if level == assignment.len() {
            let mut acc = ctx.one.clone();
            for factor in &self.inst.factors {
                let key: Vec<u32> = factor.edge().iter().map(|&v| assignment[v]).collect();
                match factor.get(&key) {
                    Some(v) => acc = ctx.mul(&acc, v),
                    None => return ctx.zero.clone(),
                }
            }
            return acc;
        }
        let agg = self.inst.aggregates[level].as_ref().expect("bound variable");
        let mut acc: Option<Value> = None;
        for code in 0..self.sizes[level] as u32 {
            assignment[level] = code;
            let inner = self.fold(level + 1, assignment);
            acc = Some(match acc {
                None => inner,
                Some(a) => agg.op.apply(&a, &inner),
            });
        }
        acc.unwrap_or_else(|| {
            if agg.is_product() {
                ctx.one.clone()
            } else {
                ctx.zero.clone()
            }
        })
    }
}
