//! Sparse factors in listing representation.
//!
//! A factor over edge `S` stores one row per tuple `x_S` with a nonzero
//! value; every absent tuple has value `0`. Variables are identified by
//! their position in the query's variable sequence, the edge is kept sorted
//! by that position, and rows are kept sorted by key.

use std::collections::HashSet;

use crate::algebra::{value_power_with, Aggregate, SemiringContext, Value};
use crate::error::{FaqError, Result};

/// Index of a variable in the query's variable sequence.
pub type VarId = usize;

/// Dictionary-encoded tuple, one code per edge variable.
pub type Key = Box<[u32]>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DomainKind {
    /// All codes `0..size` of the variable's dictionary.
    Explicit(u32),
    Active,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VariableDomain {
    pub var: VarId,
    pub kind: DomainKind,
}

impl VariableDomain {
    pub fn explicit(var: VarId, size: u32) -> Self {
        VariableDomain {
            var,
            kind: DomainKind::Explicit(size),
        }
    }

    pub fn size(&self) -> Option<u32> {
        match self.kind {
            DomainKind::Explicit(n) => Some(n),
            DomainKind::Active => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Factor {
    edge: Vec<VarId>,
    rows: Vec<(Key, Value)>,
}

impl Factor {
    /// A factor whose rows are already canonical (sorted, unique, nonzero).
    pub(crate) fn from_sorted(edge: Vec<VarId>, rows: Vec<(Key, Value)>) -> Factor {
        debug_assert!(edge.windows(2).all(|w| w[0] < w[1]));
        debug_assert!(rows.windows(2).all(|w| w[0].0 < w[1].0));
        Factor { edge, rows }
    }

    pub fn empty(edge: Vec<VarId>) -> Factor {
        let mut edge = edge;
        edge.sort_unstable();
        Factor { edge, rows: vec![] }
    }

    /// The scalar factor over the empty edge.
    pub fn scalar(ctx: &SemiringContext, v: Value) -> Factor {
        let rows = if ctx.is_zero(&v) {
            vec![]
        } else {
            vec![(Key::default(), v)]
        };
        Factor { edge: vec![], rows }
    }

    pub fn edge(&self) -> &[VarId] {
        &self.edge
    }

    pub fn rows(&self) -> &[(Key, Value)] {
        &self.rows
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Value of a scalar factor; `zero` when empty.
    pub fn scalar_value(&self, ctx: &SemiringContext) -> Value {
        debug_assert!(self.edge.is_empty());
        self.rows.first().map_or_else(|| ctx.zero.clone(), |(_, v)| v.clone())
    }

    pub fn get(&self, key: &[u32]) -> Option<&Value> {
        self.rows
            .binary_search_by(|(k, _)| (**k).cmp(key))
            .ok()
            .map(|i| &self.rows[i].1)
    }

    fn position(&self, var: VarId) -> Result<usize> {
        self.edge
            .iter()
            .position(|&v| v == var)
            .ok_or(FaqError::VariableNotInEdge(var))
    }
}

/// Number of nonzero points of the factor.
pub fn factor_size(f: &Factor) -> usize {
    f.rows.len()
}

/// Builds a canonical factor. `edge` may be in any order; each raw row lists
/// one code per edge variable in that same order.
pub fn build_factor(
    name: &str,
    edge: &[VarId],
    rows: Vec<(Vec<u32>, Value)>,
    ctx: &SemiringContext,
) -> Result<Factor> {
    let mut sorted_edge = edge.to_vec();
    sorted_edge.sort_unstable();
    if sorted_edge.windows(2).any(|w| w[0] == w[1]) {
        return Err(FaqError::InvalidQuery(format!(
            "factor {name} repeats a variable"
        )));
    }
    // column j of the canonical key comes from raw column perm[j]
    let perm: Vec<usize> = sorted_edge
        .iter()
        .map(|v| edge.iter().position(|e| e == v).unwrap())
        .collect();
    let mut out = Vec::with_capacity(rows.len());
    for (raw, value) in rows {
        if raw.len() != edge.len() {
            return Err(FaqError::ArityMismatch {
                factor: name.to_string(),
                expected: edge.len(),
                found: raw.len(),
            });
        }
        if !ctx.carrier.contains(&value) {
            return Err(FaqError::ValueOutsideCarrier {
                value: value.to_string(),
                carrier: ctx.carrier.name().to_string(),
            });
        }
        let key: Key = perm.iter().map(|&j| raw[j]).collect();
        out.push((key, value));
    }
    out.sort_by(|a, b| a.0.cmp(&b.0));
    if let Some(w) = out.windows(2).find(|w| w[0].0 == w[1].0) {
        return Err(FaqError::DuplicateKey {
            factor: name.to_string(),
            key: format!("{:?}", w[0].0),
        });
    }
    out.retain(|(_, v)| !ctx.is_zero(v));
    Ok(Factor {
        edge: sorted_edge,
        rows: out,
    })
}

/// The 0/1 indicator of `f`'s support projected onto `target`.
pub fn indicator_projection(
    f: &Factor,
    target: &[VarId],
    ctx: &SemiringContext,
) -> Result<Factor> {
    let mut target = target.to_vec();
    target.sort_unstable();
    target.dedup();
    let cols = target
        .iter()
        .map(|&v| f.position(v).map_err(|_| FaqError::NotSubset))
        .collect::<Result<Vec<_>>>()?;
    let mut keys: Vec<Key> = f
        .rows
        .iter()
        .map(|(k, _)| cols.iter().map(|&c| k[c]).collect())
        .collect();
    keys.sort_unstable();
    keys.dedup();
    let rows = keys.into_iter().map(|k| (k, ctx.one.clone())).collect();
    Ok(Factor { edge: target, rows })
}

fn without_column(key: &[u32], col: usize) -> Key {
    key.iter()
        .enumerate()
        .filter(|&(i, _)| i != col)
        .map(|(_, &c)| c)
        .collect()
}

/// Groups rows by the key without `var` and folds values with `agg`.
pub fn semiring_marginalize(
    f: &Factor,
    var: VarId,
    agg: &Aggregate,
    ctx: &SemiringContext,
) -> Result<Factor> {
    if agg.is_product() {
        return Err(FaqError::ProductAggregate(agg.name.clone()));
    }
    let col = f.position(var)?;
    let mut grouped: Vec<(Key, &Value)> = f
        .rows
        .iter()
        .map(|(k, v)| (without_column(k, col), v))
        .collect();
    grouped.sort_by(|a, b| a.0.cmp(&b.0));
    let mut rows: Vec<(Key, Value)> = Vec::new();
    for (key, value) in grouped {
        match rows.last_mut() {
            Some((last, acc)) if *last == key => *acc = agg.op.apply(acc, value),
            _ => rows.push((key, value.clone())),
        }
    }
    rows.retain(|(_, v)| !ctx.is_zero(v));
    let edge = f.edge.iter().copied().filter(|&v| v != var).collect();
    Ok(Factor { edge, rows })
}

/// `⊗` over every value of `var`'s explicit domain; a residual key that
/// misses any domain value is `0` and disappears.
pub fn product_marginalize(
    f: &Factor,
    var: VarId,
    dom: &VariableDomain,
    ctx: &SemiringContext,
) -> Result<Factor> {
    let col = f.position(var)?;
    let size = dom.size().ok_or(FaqError::ActiveDomain(format!("#{var}")))? as usize;
    let mut grouped: Vec<(Key, &Value)> = f
        .rows
        .iter()
        .map(|(k, v)| (without_column(k, col), v))
        .collect();
    grouped.sort_by(|a, b| a.0.cmp(&b.0));
    let mut rows: Vec<(Key, Value)> = Vec::new();
    let mut counts: Vec<usize> = Vec::new();
    for (key, value) in grouped {
        match rows.last_mut() {
            Some((last, acc)) if *last == key => {
                *acc = ctx.mul(acc, value);
                *counts.last_mut().unwrap() += 1;
            }
            _ => {
                rows.push((key, value.clone()));
                counts.push(1);
            }
        }
    }
    let rows = rows
        .into_iter()
        .zip(counts)
        .filter(|((_, v), n)| *n == size && !ctx.is_zero(v))
        .map(|(row, _)| row)
        .collect();
    let edge = f.edge.iter().copied().filter(|&v| v != var).collect();
    Ok(Factor { edge, rows })
}

/// Raises every value to the `exponent`-th `⊗`-power.
pub fn power_factor(f: &Factor, exponent: u64, ctx: &SemiringContext) -> Factor {
    power_factor_with(f, exponent, ctx, true)
}

pub fn power_factor_with(f: &Factor, exponent: u64, ctx: &SemiringContext, shortcut: bool) -> Factor {
    if exponent == 1 || (shortcut && f.rows.iter().all(|(_, v)| ctx.is_product_idempotent(v))) {
        return f.clone();
    }
    let rows = f
        .rows
        .iter()
        .map(|(k, v)| (k.clone(), value_power_with(ctx, v, exponent, shortcut)))
        .filter(|(_, v)| !ctx.is_zero(v))
        .collect();
    Factor {
        edge: f.edge.clone(),
        rows,
    }
}

/// Supports of two factors as sets, for order-insensitive comparisons.
pub fn support(f: &Factor) -> HashSet<Key> {
    f.rows.iter().map(|(k, _)| k.clone()).collect()
}
