use std::fmt;

use crate::error::{FaqError, Result};
use crate::factor::VarId;

/// A permutation of all query variables whose first `free_len` entries are
/// the free variables. Elimination runs from the last entry backwards.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VariableOrdering {
    order: Vec<VarId>,
    free_len: usize,
}

impl VariableOrdering {
    /// Validates that `order` permutes `0..num_vars` and starts with the
    /// variables `0..free_len`.
    pub fn new(order: Vec<VarId>, num_vars: usize, free_len: usize) -> Result<Self> {
        if order.len() != num_vars {
            return Err(FaqError::InvalidOrdering(format!(
                "expected {num_vars} variables, got {}",
                order.len()
            )));
        }
        let mut seen = vec![false; num_vars];
        for &v in &order {
            if v >= num_vars || std::mem::replace(&mut seen[v], true) {
                return Err(FaqError::InvalidOrdering(format!(
                    "variable #{v} is out of range or repeated"
                )));
            }
        }
        if let Some(&v) = order[..free_len].iter().find(|&&v| v >= free_len) {
            return Err(FaqError::InvalidOrdering(format!(
                "bound variable #{v} appears inside the free prefix"
            )));
        }
        Ok(VariableOrdering { order, free_len })
    }

    /// The declaration order.
    pub fn identity(num_vars: usize, free_len: usize) -> Self {
        VariableOrdering {
            order: (0..num_vars).collect(),
            free_len,
        }
    }

    pub fn as_slice(&self) -> &[VarId] {
        &self.order
    }

    pub fn free_len(&self) -> usize {
        self.free_len
    }

    pub fn free(&self) -> &[VarId] {
        &self.order[..self.free_len]
    }

    pub fn bound(&self) -> &[VarId] {
        &self.order[self.free_len..]
    }

    /// Position of every variable inside the ordering.
    pub fn positions(&self) -> Vec<usize> {
        let mut pos = vec![0; self.order.len()];
        for (i, &v) in self.order.iter().enumerate() {
            pos[v] = i;
        }
        pos
    }
}

impl fmt::Display for VariableOrdering {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ids: Vec<String> = self.order.iter().map(|v| v.to_string()).collect();
        write!(f, "{}", ids.join(","))
    }
}
