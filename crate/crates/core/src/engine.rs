//! InsideOut: eliminates bound variables innermost-first, joining each
//! variable's subquery with a worst-case optimal join and folding the
//! variable away, then joins the residual factors over the free variables.

use std::collections::BTreeMap;

use crate::algebra::{Aggregate, Value};
use crate::error::{FaqError, Result};
use crate::factor::{
    indicator_projection, power_factor_with, product_marginalize, Factor, Key, VarId,
};
use crate::hypergraph::{eliminate_step_with, EdgeId, ProjectionPolicy, StepMode};
use crate::ordering::VariableOrdering;
use crate::query::Instance;
use crate::wcoj::{generic_join, join_factor, JoinStats};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EngineOptions {
    pub projections: ProjectionPolicy,
    /// Skip powering values with `v ⊗ v = v` in product steps.
    pub idempotence_shortcut: bool,
}

impl Default for EngineOptions {
    fn default() -> Self {
        EngineOptions {
            projections: ProjectionPolicy::default(),
            idempotence_shortcut: true,
        }
    }
}

/// A named factor as it appears in the trace.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FactorRef {
    pub name: String,
    /// Columns in display order.
    pub vars: Vec<VarId>,
    /// `true` for factors produced by the engine.
    pub intermediate: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Input {
    pub factor: FactorRef,
    pub size: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProjectionUse {
    pub factor: FactorRef,
    pub source: FactorRef,
    pub size: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RewriteOp {
    Marginalize,
    Power(u64),
    Unchanged,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rewrite {
    pub input: FactorRef,
    pub output: FactorRef,
    pub op: RewriteOp,
    pub size: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StepKind {
    Semiring {
        boundary: Vec<Input>,
        absorbed: Vec<Input>,
        projections: Vec<ProjectionUse>,
        output: FactorRef,
        join: JoinStats,
        output_size: usize,
    },
    Product {
        domain_size: u64,
        rewrites: Vec<Rewrite>,
    },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StepTrace {
    pub var: VarId,
    pub aggregate: String,
    pub union: Vec<VarId>,
    pub kind: StepKind,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FinalJoin {
    pub inputs: Vec<Input>,
    /// Free variables in join order.
    pub vars: Vec<VarId>,
    pub join: JoinStats,
    pub output_size: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Trace {
    pub steps: Vec<StepTrace>,
    pub finish: FinalJoin,
}

impl Trace {
    pub fn expanded_bindings(&self) -> u64 {
        let steps: u64 = self
            .steps
            .iter()
            .map(|s| match &s.kind {
                StepKind::Semiring { join, .. } => join.expanded_bindings,
                StepKind::Product { .. } => 0,
            })
            .sum();
        steps + self.finish.join.expanded_bindings
    }
}

#[derive(Clone, Debug)]
pub struct EngineRun {
    /// Output over the free variables; a scalar factor when there are none.
    pub output: Factor,
    pub trace: Trace,
}

struct Live {
    reference: FactorRef,
    factor: Factor,
}

impl Live {
    fn input(&self) -> Input {
        Input {
            factor: self.reference.clone(),
            size: self.factor.rows().len(),
        }
    }
}

struct State<'a> {
    inst: &'a Instance,
    options: EngineOptions,
    positions: Vec<usize>,
    live: BTreeMap<EdgeId, Live>,
    hypergraph: crate::hypergraph::Hypergraph,
    intermediates: usize,
    projections: usize,
}

impl State<'_> {
    fn fresh(&mut self, vars: Vec<VarId>) -> FactorRef {
        self.intermediates += 1;
        FactorRef {
            name: format!("psi{}", self.intermediates),
            vars,
            intermediate: true,
        }
    }

    fn eliminate_semiring(&mut self, var: VarId, agg: &Aggregate) -> Result<StepTrace> {
        let ctx = &self.inst.ctx;
        let step = eliminate_step_with(&self.hypergraph, var, StepMode::Semiring, self.options.projections)?;
        let mut order = step.union.clone();
        order.sort_by_key(|&v| self.positions[v]);
        if order.last() != Some(&var) {
            return Err(FaqError::Internal(format!(
                "variable #{var} is not innermost in its subquery"
            )));
        }
        let mut projected = Vec::with_capacity(step.projections.len());
        let mut projection_uses = Vec::with_capacity(step.projections.len());
        for p in &step.projections {
            let source = &self.live[&p.source];
            let f = indicator_projection(&source.factor, &p.vars, ctx)?;
            self.projections += 1;
            projection_uses.push(ProjectionUse {
                factor: FactorRef {
                    name: format!("proj{}", self.projections),
                    vars: p.vars.clone(),
                    intermediate: true,
                },
                source: source.reference.clone(),
                size: f.rows().len(),
            });
            projected.push(f);
        }
        let participants: Vec<&Factor> = step
            .boundary
            .iter()
            .chain(&step.absorbed)
            .map(|id| &self.live[id].factor)
            .chain(&projected)
            .collect();

        let mut join = JoinStats::default();
        let mut grouped: Vec<(Vec<u32>, Value)> = Vec::new();
        generic_join(&participants, &order, ctx, &mut join, |binding, value| {
            let key = &binding[..binding.len() - 1];
            match grouped.last_mut() {
                Some((k, acc)) if k.as_slice() == key => *acc = agg.op.apply(acc, &value),
                _ => grouped.push((key.to_vec(), value)),
            }
        })?;
        let kept = &order[..order.len() - 1];
        let mut edge = kept.to_vec();
        edge.sort_unstable();
        let cols: Vec<usize> = edge
            .iter()
            .map(|v| kept.iter().position(|k| k == v).unwrap())
            .collect();
        let mut rows: Vec<(Key, Value)> = grouped
            .into_iter()
            .filter(|(_, v)| !ctx.is_zero(v))
            .map(|(k, v)| (cols.iter().map(|&c| k[c]).collect(), v))
            .collect();
        rows.sort_unstable_by(|a, b| a.0.cmp(&b.0));
        let factor = Factor::from_sorted(edge.clone(), rows);

        let boundary = step.boundary.iter().map(|id| self.live[id].input()).collect();
        let absorbed = step.absorbed.iter().map(|id| self.live[id].input()).collect();
        for id in step.boundary.iter().chain(&step.absorbed) {
            self.live.remove(id);
        }
        let output = self.fresh(edge);
        let output_size = factor.rows().len();
        let new_edge = step
            .new_edge
            .ok_or_else(|| FaqError::Internal("semiring step without a new edge".into()))?;
        self.live.insert(
            new_edge,
            Live {
                reference: output.clone(),
                factor,
            },
        );
        self.hypergraph = step.successor;
        Ok(StepTrace {
            var,
            aggregate: agg.name.clone(),
            union: step.union,
            kind: StepKind::Semiring {
                boundary,
                absorbed,
                projections: projection_uses,
                output,
                join,
                output_size,
            },
        })
    }

    fn eliminate_product(&mut self, var: VarId, agg: &Aggregate) -> Result<StepTrace> {
        let ctx = &self.inst.ctx;
        let dom = &self.inst.domains[var];
        let size = dom
            .size()
            .ok_or_else(|| FaqError::ActiveDomain(self.inst.query.var_name(var).to_string()))?;
        let exponent = u64::from(size);
        let step = eliminate_step_with(&self.hypergraph, var, StepMode::Product, self.options.projections)?;
        let shortcut = self.options.idempotence_shortcut;
        let mut rewrites = Vec::new();
        let ids: Vec<EdgeId> = self.live.keys().copied().collect();
        for id in ids {
            let current = &self.live[&id];
            let (op, factor) = if current.factor.edge().contains(&var) {
                (RewriteOp::Marginalize, product_marginalize(&current.factor, var, dom, ctx)?)
            } else if exponent == 1
                || (shortcut && current.factor.rows().iter().all(|(_, v)| ctx.is_product_idempotent(v)))
            {
                (RewriteOp::Unchanged, current.factor.clone())
            } else {
                (RewriteOp::Power(exponent), power_factor_with(&current.factor, exponent, ctx, shortcut))
            };
            let input = current.reference.clone();
            let output = match op {
                RewriteOp::Unchanged => input.clone(),
                _ => {
                    let vars = input.vars.iter().copied().filter(|&v| v != var).collect();
                    self.fresh(vars)
                }
            };
            rewrites.push(Rewrite {
                input,
                output: output.clone(),
                op,
                size: factor.rows().len(),
            });
            self.live.insert(id, Live { reference: output, factor });
        }
        self.hypergraph = step.successor;
        Ok(StepTrace {
            var,
            aggregate: agg.name.clone(),
            union: step.union,
            kind: StepKind::Product {
                domain_size: exponent,
                rewrites,
            },
        })
    }
}

/// Evaluates the instance along `sigma`, eliminating its bound suffix from
/// the last entry backwards.
pub fn run_insideout(inst: &Instance, sigma: &VariableOrdering, options: &EngineOptions) -> Result<EngineRun> {
    if sigma.as_slice().len() != inst.num_vars() || sigma.free_len() != inst.free_len() {
        return Err(FaqError::InvalidOrdering(format!(
            "ordering has {} variables with {} free; query has {} with {} free",
            sigma.as_slice().len(),
            sigma.free_len(),
            inst.num_vars(),
            inst.free_len()
        )));
    }
    let hypergraph = inst.query.hypergraph()?;
    let factors = inst.hypergraph_factors();
    let isolated = inst.query.isolated_vars();
    let mut live = BTreeMap::new();
    for (id, factor) in factors.into_iter().enumerate() {
        let reference = if id < inst.query.factors.len() {
            FactorRef {
                name: inst.query.factors[id].name.clone(),
                vars: inst.query.factor_vars(id),
                intermediate: false,
            }
        } else {
            let v = isolated[id - inst.query.factors.len()];
            FactorRef {
                name: format!("dom_{}", inst.query.var_name(v)),
                vars: vec![v],
                intermediate: false,
            }
        };
        live.insert(id, Live { reference, factor });
    }
    let mut state = State {
        inst,
        options: *options,
        positions: sigma.positions(),
        live,
        hypergraph,
        intermediates: 0,
        projections: 0,
    };

    let mut steps = Vec::new();
    for &var in sigma.bound().iter().rev() {
        let agg = inst.aggregates[var]
            .clone()
            .ok_or_else(|| FaqError::Internal(format!("bound variable #{var} has no aggregate")))?;
        let step = if agg.is_product() {
            state.eliminate_product(var, &agg)?
        } else {
            state.eliminate_semiring(var, &agg)?
        };
        steps.push(step);
    }

    let free = sigma.free();
    let inputs: Vec<Input> = state.live.values().map(Live::input).collect();
    let participants: Vec<&Factor> = state.live.values().map(|l| &l.factor).collect();
    let mut join = JoinStats::default();
    let output = join_factor(&participants, free, &inst.ctx, &mut join)?;
    let finish = FinalJoin {
        inputs,
        vars: free.to_vec(),
        join,
        output_size: output.rows().len(),
    };
    Ok(EngineRun {
        output,
        trace: Trace { steps, finish },
    })
}
