//! Leapfrog-style generic join over sorted factor listings.
//!
//! Each participant is re-sorted with its columns in join order, so binding
//! a prefix of the join order narrows every participant to a contiguous row
//! range. At each level the candidate values of the participants that mention
//! the level's variable are intersected by galloping seeks. Values are
//! multiplied only once a full binding is reached.

use crate::algebra::{SemiringContext, Value};
use crate::error::{FaqError, Result};
use crate::factor::{Factor, Key, VarId};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct JoinStats {
    /// Matched values summed over all levels of the search.
    pub expanded_bindings: u64,
    /// Full bindings with a nonzero product.
    pub outputs: u64,
}

impl JoinStats {
    pub fn add(&mut self, other: JoinStats) {
        self.expanded_bindings += other.expanded_bindings;
        self.outputs += other.outputs;
    }
}

struct Relation<'a> {
    arity: usize,
    /// Row-major keys, columns in join order.
    keys: Vec<u32>,
    values: Vec<&'a Value>,
    /// `column_at[level]` is the key column bound at that level, if any.
    column_at: Vec<Option<usize>>,
}

impl<'a> Relation<'a> {
    fn new(f: &'a Factor, positions: &[usize], depth: usize) -> Relation<'a> {
        let mut cols: Vec<usize> = (0..f.edge().len()).collect();
        cols.sort_by_key(|&c| positions[c]);
        let mut column_at = vec![None; depth];
        for (j, &c) in cols.iter().enumerate() {
            column_at[positions[c]] = Some(j);
        }
        let mut rows: Vec<(Vec<u32>, &Value)> = f
            .rows()
            .iter()
            .map(|(k, v)| (cols.iter().map(|&c| k[c]).collect(), v))
            .collect();
        rows.sort_unstable_by(|a, b| a.0.cmp(&b.0));
        let arity = cols.len();
        let mut keys = Vec::with_capacity(rows.len() * arity);
        let mut values = Vec::with_capacity(rows.len());
        for (k, v) in rows {
            keys.extend_from_slice(&k);
            values.push(v);
        }
        Relation { arity, keys, values, column_at }
    }

    #[inline]
    fn at(&self, row: usize, col: usize) -> u32 {
        self.keys[row * self.arity + col]
    }

    /// First row in `lo..hi` whose column `col` is at least `target`.
    fn seek(&self, col: usize, lo: usize, hi: usize, target: u32) -> usize {
        if lo >= hi || self.at(lo, col) >= target {
            return lo;
        }
        let mut step = 1;
        let mut base = lo;
        while base + step < hi && self.at(base + step, col) < target {
            base += step;
            step *= 2;
        }
        let (mut l, mut h) = (base + 1, (base + step).min(hi));
        while l < h {
            let mid = (l + h) / 2;
            if self.at(mid, col) < target {
                l = mid + 1;
            } else {
                h = mid;
            }
        }
        l
    }
}

struct Join<'a, 'c> {
    relations: Vec<Relation<'a>>,
    /// Relations mentioning each level's variable.
    active: Vec<Vec<usize>>,
    scalar: Value,
    ctx: &'c SemiringContext,
}

impl<'a, 'c> Join<'a, 'c> {
    fn prepare(
        participants: &[&'a Factor],
        order: &[VarId],
        ctx: &'c SemiringContext,
    ) -> Result<Option<Join<'a, 'c>>> {
        let depth = order.len();
        let mut scalar = ctx.one.clone();
        let mut relations = Vec::new();
        for f in participants {
            if f.edge().is_empty() {
                if f.is_empty() {
                    return Ok(None);
                }
                scalar = ctx.mul(&scalar, &f.scalar_value(ctx));
                continue;
            }
            if f.is_empty() {
                return Ok(None);
            }
            let positions = f
                .edge()
                .iter()
                .map(|&v| order.iter().position(|&o| o == v).ok_or(FaqError::JoinOrder(v)))
                .collect::<Result<Vec<_>>>()?;
            relations.push(Relation::new(f, &positions, depth));
        }
        let active: Vec<Vec<usize>> = (0..depth)
            .map(|level| {
                (0..relations.len())
                    .filter(|&r| relations[r].column_at[level].is_some())
                    .collect()
            })
            .collect();
        if let Some(level) = active.iter().position(|a| a.is_empty()) {
            return Err(FaqError::JoinOrder(order[level]));
        }
        Ok(Some(Join { relations, active, scalar, ctx }))
    }

    /// Intersects the candidate values at `level` and calls `visit` with each
    /// matched value and the narrowed ranges.
    fn intersect(
        &self,
        level: usize,
        ranges: &[(usize, usize)],
        stats: &mut JoinStats,
        mut visit: impl FnMut(u32, &[(usize, usize)], &mut JoinStats),
    ) {
        let active = &self.active[level];
        let mut cursor: Vec<usize> = active.iter().map(|&r| ranges[r].0).collect();
        let mut narrowed = ranges.to_vec();
        let col = |i: usize| self.relations[active[i]].column_at[level].unwrap();
        loop {
            let mut target = 0u32;
            for (i, &r) in active.iter().enumerate() {
                if cursor[i] >= ranges[r].1 {
                    return;
                }
                target = target.max(self.relations[r].at(cursor[i], col(i)));
            }
            let mut aligned = true;
            for (i, &r) in active.iter().enumerate() {
                let rel = &self.relations[r];
                cursor[i] = rel.seek(col(i), cursor[i], ranges[r].1, target);
                if cursor[i] >= ranges[r].1 {
                    return;
                }
                if rel.at(cursor[i], col(i)) != target {
                    aligned = false;
                }
            }
            if !aligned {
                continue;
            }
            stats.expanded_bindings += 1;
            for (i, &r) in active.iter().enumerate() {
                let end = self.relations[r].seek(col(i), cursor[i], ranges[r].1, target + 1);
                narrowed[r] = (cursor[i], end);
            }
            visit(target, &narrowed, stats);
            for (i, &r) in active.iter().enumerate() {
                cursor[i] = narrowed[r].1;
                narrowed[r] = ranges[r];
            }
        }
    }

    fn descend(
        &self,
        level: usize,
        ranges: &[(usize, usize)],
        binding: &mut Vec<u32>,
        stats: &mut JoinStats,
        emit: &mut dyn FnMut(&[u32], Value),
    ) {
        if level == self.active.len() {
            let mut product = self.scalar.clone();
            for (rel, &(lo, _)) in self.relations.iter().zip(ranges) {
                product = self.ctx.mul(&product, rel.values[lo]);
            }
            if !self.ctx.is_zero(&product) {
                stats.outputs += 1;
                emit(binding, product);
            }
            return;
        }
        self.intersect(level, ranges, stats, |value, narrowed, stats| {
            binding.push(value);
            self.descend(level + 1, narrowed, binding, stats, emit);
            binding.pop();
        });
    }

    fn full_ranges(&self) -> Vec<(usize, usize)> {
        self.relations.iter().map(|r| (0, r.values.len())).collect()
    }
}

/// Enumerates every binding of `order` on which all participants are
/// nonzero, in lexicographic order of the binding, passing the product of
/// the participants' values. Every participant edge must lie inside `order`
/// and every variable of `order` must occur in some participant.
pub fn generic_join(
    participants: &[&Factor],
    order: &[VarId],
    ctx: &SemiringContext,
    stats: &mut JoinStats,
    mut emit: impl FnMut(&[u32], Value),
) -> Result<()> {
    let Some(join) = Join::prepare(participants, order, ctx)? else {
        return Ok(());
    };
    let mut binding = Vec::with_capacity(order.len());
    join.descend(0, &join.full_ranges(), &mut binding, stats, &mut emit);
    Ok(())
}

/// Materializes the join as a canonical factor over the variables of `order`.
pub fn join_factor(
    participants: &[&Factor],
    order: &[VarId],
    ctx: &SemiringContext,
    stats: &mut JoinStats,
) -> Result<Factor> {
    let mut edge = order.to_vec();
    edge.sort_unstable();
    let cols: Vec<usize> = edge
        .iter()
        .map(|v| order.iter().position(|o| o == v).unwrap())
        .collect();
    let mut rows: Vec<(Key, Value)> = Vec::new();
    generic_join(participants, order, ctx, stats, |binding, value| {
        rows.push((cols.iter().map(|&c| binding[c]).collect(), value));
    })?;
    rows.sort_unstable_by(|a, b| a.0.cmp(&b.0));
    Ok(Factor::from_sorted(edge, rows))
}
