//! Variable-ordering search: precedence poset, linear extensions, and exact
//! or greedy minimization of the FAQ width.

use std::collections::BTreeSet;

use num_rational::BigRational;

use crate::algebra::{Aggregate, Op};
use crate::error::Result;
use crate::exec::Execution;
use crate::factor::VarId;
use crate::hypergraph::{
    eliminate_step_with, width_of_ordering, CostModel, EdgeWeight, Hypergraph, ProjectionPolicy,
    StepMode, TreeDecomposition, WidthReport,
};
use crate::ordering::VariableOrdering;
use crate::query::FaqQuery;

/// Precedence among bound variables; the free block precedes all of them.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PrecedencePoset {
    num_vars: usize,
    free_len: usize,
    /// `preds[v]`: bound variables that must come before `v`.
    preds: Vec<BTreeSet<VarId>>,
}

impl PrecedencePoset {
    pub fn bound(&self) -> impl Iterator<Item = VarId> + '_ {
        self.free_len..self.num_vars
    }

    pub fn precedes(&self, u: VarId, v: VarId) -> bool {
        self.preds[v].contains(&u)
    }

    pub fn predecessors(&self, v: VarId) -> &BTreeSet<VarId> {
        &self.preds[v]
    }

    /// All `(u, v)` with `u` required before `v`.
    pub fn pairs(&self) -> Vec<(VarId, VarId)> {
        self.bound()
            .flat_map(|v| self.preds[v].iter().map(move |&u| (u, v)))
            .collect()
    }

    pub fn admits(&self, sigma: &VariableOrdering) -> bool {
        let pos = sigma.positions();
        self.pairs().iter().all(|&(u, v)| pos[u] < pos[v])
    }
}

struct PosetBuilder<'a> {
    edges: Vec<Vec<VarId>>,
    aggregates: &'a [Option<Aggregate>],
    preds: Vec<BTreeSet<VarId>>,
}

impl PosetBuilder<'_> {
    fn op(&self, v: VarId) -> Op {
        self.aggregates[v].as_ref().expect("bound variable").op
    }

    fn is_product(&self, v: VarId) -> bool {
        self.aggregates[v].as_ref().is_some_and(Aggregate::is_product)
    }

    /// Connected components of `vars` (kept in aggregate order) when only
    /// the variables in `vars` are considered.
    fn components(&self, vars: &[VarId]) -> Vec<Vec<VarId>> {
        let inside: BTreeSet<VarId> = vars.iter().copied().collect();
        let mut label: Vec<Option<usize>> = vec![None; self.aggregates.len()];
        let mut count = 0;
        for &start in vars {
            if label[start].is_some() {
                continue;
            }
            label[start] = Some(count);
            let mut stack = vec![start];
            while let Some(x) = stack.pop() {
                for e in self.edges.iter().filter(|e| e.contains(&x)) {
                    for &y in e {
                        if inside.contains(&y) && label[y].is_none() {
                            label[y] = Some(count);
                            stack.push(y);
                        }
                    }
                }
            }
            count += 1;
        }
        let mut out = vec![Vec::new(); count];
        for &v in vars {
            out[label[v].unwrap()].push(v);
        }
        out
    }

    /// `vars` in aggregate order; every variable outside is conditioned.
    fn build(&mut self, vars: &[VarId]) {
        if vars.len() <= 1 {
            return;
        }
        if vars.iter().any(|&v| self.is_product(v)) {
            self.group(vars, false);
        } else {
            for component in self.components(vars) {
                self.group(&component, true);
            }
        }
    }

    fn group(&mut self, vars: &[VarId], connected: bool) {
        let op = self.op(vars[0]);
        let run_len = vars.iter().take_while(|&&v| self.op(v) == op).count();
        if run_len == vars.len() {
            return;
        }
        let (run, rest) = vars.split_at(run_len);
        let mut core: Vec<VarId> = Vec::new();
        if connected && !rest.iter().any(|&v| self.is_product(v)) {
            core = run
                .iter()
                .copied()
                .filter(|&r| {
                    let others: Vec<VarId> = vars.iter().copied().filter(|&v| v != r).collect();
                    self.components(&others).len() > 1
                })
                .collect();
        }
        if core.is_empty() {
            core = run.to_vec();
        }
        let later: Vec<VarId> = vars.iter().copied().filter(|v| !core.contains(v)).collect();
        for &v in &later {
            self.preds[v].extend(core.iter().copied());
        }
        self.build(&later);
    }
}

/// Reconstructed expression-tree poset: within a connected group, a leading
/// run of one aggregate operator (or the run members that separate the
/// group) precedes the rest; separate components are unordered unless a
/// product aggregate is involved.
pub fn build_precedence_poset(query: &FaqQuery) -> Result<PrecedencePoset> {
    let ctx = query.context()?;
    let aggregates = query.aggregates(&ctx)?;
    let h = query.hypergraph()?;
    let free_len = query.free_len();
    let mut builder = PosetBuilder {
        edges: h.edges().iter().map(|e| e.vars.clone()).collect(),
        aggregates: &aggregates,
        preds: vec![BTreeSet::new(); query.num_vars()],
    };
    let any_product = aggregates.iter().flatten().any(Aggregate::is_product);
    let isolated = query.isolated_vars();
    // Aggregating over one value is the identity, and an isolated variable
    // only scales the result by `1 ⊕ … ⊕ 1`, which commutes with every
    // semiring aggregate and, when it equals 1, with products too.
    let floats = |v: VarId| {
        let singleton = query.variables[v].domain.as_ref().is_some_and(|d| d.len() == 1);
        let agg = aggregates[v].as_ref().expect("bound variable");
        singleton
            || (isolated.contains(&v)
                && agg.is_semiring()
                && (matches!(agg.op, Op::Max | Op::Or) || !any_product))
    };
    let bound: Vec<VarId> = (free_len..query.num_vars()).filter(|&v| !floats(v)).collect();
    builder.build(&bound);
    // transitive closure
    let mut preds = builder.preds;
    loop {
        let mut changed = false;
        for v in free_len..query.num_vars() {
            let extra: BTreeSet<VarId> = preds[v].iter().flat_map(|&u| preds[u].clone()).collect();
            let before = preds[v].len();
            preds[v].extend(extra);
            changed |= preds[v].len() != before;
        }
        if !changed {
            break;
        }
    }
    Ok(PrecedencePoset {
        num_vars: query.num_vars(),
        free_len,
        preds,
    })
}

/// Linear extensions in lexicographic order of their bound suffix, each
/// preceded by the free variables in declaration order.
pub struct LinearExtensions<'a> {
    poset: &'a PrecedencePoset,
    prefix: Vec<VarId>,
    /// Candidates at each depth and the index of the one in use.
    stack: Vec<(Vec<VarId>, usize)>,
    started: bool,
    remaining: usize,
}

impl LinearExtensions<'_> {
    fn candidates(&self) -> Vec<VarId> {
        let placed: BTreeSet<VarId> = self.prefix.iter().copied().collect();
        self.poset
            .bound()
            .filter(|v| !placed.contains(v))
            .filter(|&v| self.poset.preds[v].iter().all(|u| placed.contains(u)))
            .collect()
    }

    /// Extends the prefix with first candidates until it is complete.
    fn descend(&mut self) {
        let total = self.poset.num_vars - self.poset.free_len;
        while self.prefix.len() < total {
            let c = self.candidates();
            self.prefix.push(c[0]);
            self.stack.push((c, 0));
        }
    }

    fn advance(&mut self) -> bool {
        while let Some((cands, idx)) = self.stack.last_mut() {
            self.prefix.pop();
            if *idx + 1 < cands.len() {
                *idx += 1;
                let next = cands[*idx];
                self.prefix.push(next);
                self.descend();
                return true;
            }
            self.stack.pop();
        }
        false
    }
}

impl Iterator for LinearExtensions<'_> {
    type Item = VariableOrdering;

    fn next(&mut self) -> Option<VariableOrdering> {
        if self.remaining == 0 {
            return None;
        }
        if !self.started {
            self.started = true;
            self.descend();
        } else if !self.advance() {
            self.remaining = 0;
            return None;
        }
        self.remaining -= 1;
        let order: Vec<VarId> = (0..self.poset.free_len).chain(self.prefix.iter().copied()).collect();
        Some(VariableOrdering::new(order, self.poset.num_vars, self.poset.free_len).expect("valid extension"))
    }
}

pub fn enumerate_orderings(poset: &PrecedencePoset, limit: usize) -> LinearExtensions<'_> {
    LinearExtensions {
        poset,
        prefix: Vec::new(),
        stack: Vec::new(),
        started: false,
        remaining: limit,
    }
}

/// Width of `sigma` under uniform sizes: the largest `ρ*` over the
/// non-product elimination steps, free variables included.
pub fn faqw_of_ordering(query: &FaqQuery, sigma: &VariableOrdering) -> Result<WidthReport> {
    let h = query.hypergraph()?;
    let mask = query.product_mask()?;
    check_ordering(query, sigma)?;
    width_of_ordering(&h, sigma.as_slice(), &mask, ProjectionPolicy::Always, CostModel::Uniform)
}

pub fn tree_decomposition(query: &FaqQuery, sigma: &VariableOrdering) -> Result<TreeDecomposition> {
    check_ordering(query, sigma)?;
    crate::hypergraph::tree_decomposition_from_ordering(&query.hypergraph()?, sigma.as_slice())
}

fn check_ordering(query: &FaqQuery, sigma: &VariableOrdering) -> Result<()> {
    VariableOrdering::new(sigma.as_slice().to_vec(), query.num_vars(), query.free_len()).map(|_| ())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SearchMode {
    Exact,
    Greedy,
}

pub const DEFAULT_CAP: usize = 10_000;

#[derive(Clone, Debug)]
pub struct OptimizerOptions {
    pub mode: SearchMode,
    /// Largest number of linear extensions exact mode will score.
    pub cap: usize,
    pub cost: CostModel,
    /// Log-size weights of the query hypergraph's edges, for `DataAware`.
    pub weights: Option<Vec<EdgeWeight>>,
    pub exec: Execution,
}

impl Default for OptimizerOptions {
    fn default() -> Self {
        OptimizerOptions {
            mode: SearchMode::Greedy,
            cap: DEFAULT_CAP,
            cost: CostModel::Uniform,
            weights: None,
            exec: Execution::default(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Optimized {
    pub ordering: VariableOrdering,
    /// `faqw` of the chosen ordering.
    pub width: BigRational,
    /// The score minimized: equals `width` under the uniform cost model.
    pub cost: BigRational,
    pub report: WidthReport,
    /// Linear extensions scored (exact mode).
    pub candidates: usize,
    /// Exact mode exceeded its cap and fell back to greedy.
    pub fell_back: bool,
}

fn weighted_hypergraph(query: &FaqQuery, opts: &OptimizerOptions) -> Result<Hypergraph> {
    let mut h = query.hypergraph()?;
    if opts.cost == CostModel::DataAware {
        if let Some(weights) = &opts.weights {
            let ids: Vec<usize> = h.edges().iter().map(|e| e.id).collect();
            for (id, w) in ids.into_iter().zip(weights) {
                h.set_weight(id, w.clone());
            }
        }
    }
    Ok(h)
}

pub fn optimize_ordering(query: &FaqQuery, opts: &OptimizerOptions) -> Result<Optimized> {
    let poset = build_precedence_poset(query)?;
    match opts.mode {
        SearchMode::Greedy => greedy(query, &poset, opts, false),
        SearchMode::Exact => {
            let candidates: Vec<VariableOrdering> =
                enumerate_orderings(&poset, opts.cap.saturating_add(1)).collect();
            if candidates.len() > opts.cap {
                return greedy(query, &poset, opts, true);
            }
            exact(query, candidates, opts)
        }
    }
}

fn exact(query: &FaqQuery, candidates: Vec<VariableOrdering>, opts: &OptimizerOptions) -> Result<Optimized> {
    let h = weighted_hypergraph(query, opts)?;
    let mask = query.product_mask()?;
    let scored = opts.exec.map(&candidates, |sigma| {
        width_of_ordering(&h, sigma.as_slice(), &mask, ProjectionPolicy::Always, opts.cost)
            .map(|report| (report.width.clone(), sigma.clone()))
    });
    let mut best: Option<(BigRational, VariableOrdering)> = None;
    for s in scored {
        let s = s?;
        if best.as_ref().is_none_or(|b| (&s.0, &s.1) < (&b.0, &b.1)) {
            best = Some(s);
        }
    }
    let (cost, ordering) = best.expect("at least one linear extension");
    let report = faqw_of_ordering(query, &ordering)?;
    Ok(Optimized {
        width: report.width.clone(),
        ordering,
        cost,
        report,
        candidates: candidates.len(),
        fell_back: false,
    })
}

fn greedy(query: &FaqQuery, poset: &PrecedencePoset, opts: &OptimizerOptions, fell_back: bool) -> Result<Optimized> {
    let mut h = weighted_hypergraph(query, opts)?;
    let mask = query.product_mask()?;
    let free_len = query.free_len();
    let mut remaining: BTreeSet<VarId> = (free_len..query.num_vars()).collect();
    let mut reversed = Vec::with_capacity(remaining.len());
    let mut cost = BigRational::from_integer(0.into());
    while !remaining.is_empty() {
        let maximal = remaining
            .iter()
            .copied()
            .filter(|&v| !remaining.iter().any(|&w| poset.precedes(v, w)));
        let mut best: Option<(BigRational, VarId, crate::hypergraph::EliminationStep)> = None;
        for v in maximal {
            let mode = if mask[v] { StepMode::Product } else { StepMode::Semiring };
            let step = eliminate_step_with(&h, v, mode, ProjectionPolicy::Always)?;
            let score = step
                .cover_objective(opts.cost == CostModel::Uniform)?
                .unwrap_or_else(|| BigRational::from_integer(0.into()));
            if best.as_ref().is_none_or(|b| score < b.0) {
                best = Some((score, v, step));
            }
        }
        let (score, v, step) = best.expect("a finite poset has a maximal element");
        remaining.remove(&v);
        reversed.push(v);
        h = step.successor;
        if let (CostModel::DataAware, Some(id)) = (opts.cost, step.new_edge) {
            h.set_weight(id, EdgeWeight::Log2(score.clone()));
        }
        if score > cost {
            cost = score;
        }
    }
    let order: Vec<VarId> = (0..free_len).chain(reversed.into_iter().rev()).collect();
    let ordering = VariableOrdering::new(order, query.num_vars(), free_len)?;
    let report = faqw_of_ordering(query, &ordering)?;
    if opts.cost == CostModel::Uniform {
        cost = report.width.clone();
    }
    Ok(Optimized {
        width: report.width.clone(),
        ordering,
        cost,
        report,
        candidates: 0,
        fell_back,
    })
}
