//! Rewrites an engine trace into a rule script, one rule per intermediate.

use crate::engine::{FactorRef, Input, RewriteOp, StepKind, Trace};
use crate::query::FaqQuery;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RuleKind {
    /// Join of a subquery folded over one variable.
    Aggregate,
    Projection,
    /// Product aggregate applied to a single factor.
    Marginalize,
    Power,
    /// Final join over the free variables.
    Join,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PlanRule {
    pub kind: RuleKind,
    pub head: String,
    pub head_vars: Vec<String>,
    /// Body factor names in rule order.
    pub body: Vec<String>,
    pub text: String,
}

struct Renderer<'a> {
    query: &'a FaqQuery,
    inputs: usize,
}

impl Renderer<'_> {
    fn vars(&self, vars: &[usize]) -> String {
        vars.iter().map(|&v| self.query.var_name(v)).collect::<Vec<_>>().join(",")
    }

    fn value_name(f: &FactorRef) -> String {
        f.name.strip_prefix("psi").map_or_else(|| f.name.clone(), |k| format!("s{k}"))
    }

    /// Atom for a valued factor, plus the name bound to its value.
    fn atom(&mut self, f: &FactorRef) -> (String, String) {
        let value = if f.intermediate {
            Self::value_name(f)
        } else {
            self.inputs += 1;
            format!("v{}", self.inputs)
        };
        (format!("{}[{}] = {value}", f.name, self.vars(&f.vars)), value)
    }

    fn projection(&self, f: &FactorRef) -> String {
        format!("{}({})", f.name, self.vars(&f.vars))
    }
}

fn product(values: &[String]) -> String {
    if values.is_empty() {
        "1".to_string()
    } else {
        values.join("*")
    }
}

fn is_output(trace: &Trace, step: usize, output: &FactorRef, free: &[usize]) -> bool {
    if step + 1 != trace.steps.len() || trace.finish.inputs.len() != 1 {
        return false;
    }
    let mut vars = output.vars.clone();
    vars.sort_unstable();
    let mut expected = free.to_vec();
    expected.sort_unstable();
    trace.finish.inputs[0].factor == *output && vars == expected
}

pub fn plan_rules(query: &FaqQuery, trace: &Trace) -> Vec<PlanRule> {
    let mut rules = Vec::new();
    let free = &trace.finish.vars;
    let mut folded_into_output = false;
    for (i, step) in trace.steps.iter().enumerate() {
        match &step.kind {
            StepKind::Semiring {
                boundary,
                absorbed,
                projections,
                output,
                ..
            } => {
                for p in projections {
                    let mut r = Renderer { query, inputs: 0 };
                    let source = if p.source.intermediate {
                        r.atom(&p.source).0
                    } else {
                        format!("{}({})", p.source.name, r.vars(&p.source.vars))
                    };
                    rules.push(PlanRule {
                        kind: RuleKind::Projection,
                        head: p.factor.name.clone(),
                        head_vars: p.factor.vars.iter().map(|&v| query.var_name(v).to_string()).collect(),
                        body: vec![p.source.name.clone()],
                        text: format!("{} <- {source}.", r.projection(&p.factor)),
                    });
                }
                let mut r = Renderer { query, inputs: 0 };
                let mut atoms = Vec::new();
                let mut values = Vec::new();
                let mut body = Vec::new();
                for input in boundary.iter().chain(absorbed) {
                    let (atom, value) = r.atom(&input.factor);
                    atoms.push(atom);
                    values.push(value);
                    body.push(input.factor.name.clone());
                }
                for p in projections {
                    atoms.push(r.projection(&p.factor));
                    body.push(p.factor.name.clone());
                }
                let last = is_output(trace, i, output, free);
                folded_into_output |= last;
                let (head, out) = if last {
                    ("output".to_string(), "t".to_string())
                } else {
                    (output.name.clone(), Renderer::value_name(output))
                };
                rules.push(PlanRule {
                    kind: RuleKind::Aggregate,
                    head_vars: output.vars.iter().map(|&v| query.var_name(v).to_string()).collect(),
                    text: format!(
                        "{head}[{}] = {out} <- agg<<{out} = {}({})>> {}.",
                        r.vars(&output.vars),
                        step.aggregate,
                        product(&values),
                        atoms.join(", ")
                    ),
                    head,
                    body,
                });
            }
            StepKind::Product { domain_size, rewrites } => {
                for w in rewrites {
                    let mut r = Renderer { query, inputs: 0 };
                    let (atom, value) = r.atom(&w.input);
                    let out = Renderer::value_name(&w.output);
                    let head = format!("{}[{}] = {out}", w.output.name, r.vars(&w.output.vars));
                    let (kind, text) = match w.op {
                        RewriteOp::Unchanged => continue,
                        RewriteOp::Marginalize => (
                            RuleKind::Marginalize,
                            format!("{head} <- agg<<{out} = {}({value})>> {atom}.", step.aggregate),
                        ),
                        RewriteOp::Power(_) => (
                            RuleKind::Power,
                            format!("{head} <- {atom}, {out} = pow({value}, {domain_size})."),
                        ),
                    };
                    rules.push(PlanRule {
                        kind,
                        head: w.output.name.clone(),
                        head_vars: w.output.vars.iter().map(|&v| query.var_name(v).to_string()).collect(),
                        body: vec![w.input.name.clone()],
                        text,
                    });
                }
            }
        }
    }
    if !folded_into_output {
        rules.push(final_join(query, &trace.finish.inputs, free));
    }
    rules
}

fn final_join(query: &FaqQuery, inputs: &[Input], free: &[usize]) -> PlanRule {
    let mut r = Renderer { query, inputs: 0 };
    let mut atoms = Vec::new();
    let mut values = Vec::new();
    for input in inputs {
        let (atom, value) = r.atom(&input.factor);
        atoms.push(atom);
        values.push(value);
    }
    let mut vars = free.to_vec();
    vars.sort_unstable();
    atoms.push(format!("t = {}", product(&values)));
    PlanRule {
        kind: RuleKind::Join,
        head: "output".into(),
        head_vars: vars.iter().map(|&v| query.var_name(v).to_string()).collect(),
        body: inputs.iter().map(|i| i.factor.name.clone()).collect(),
        text: format!("output[{}] = t <- {}.", r.vars(&vars), atoms.join(", ")),
    }
}

pub fn emit_plan(query: &FaqQuery, trace: &Trace) -> String {
    let mut out = String::new();
    for rule in plan_rules(query, trace) {
        out.push_str(&rule.text);
        out.push('\n');
    }
    out
}
