//! Query declarations and data-bound instances.

use std::cmp::Ordering;
use std::collections::{BTreeSet, HashMap};

use num_bigint::BigInt;

use crate::algebra::{Aggregate, SemiringContext, Value};
use crate::error::{FaqError, Result};
use crate::factor::{build_factor, DomainKind, Factor, VarId, VariableDomain};
use crate::hypergraph::Hypergraph;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VariableDecl {
    pub name: String,
    /// `None` for a free variable.
    pub aggregate: Option<String>,
    /// Explicit domain values, if declared.
    pub domain: Option<Vec<String>>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FactorDecl {
    pub name: String,
    pub vars: Vec<String>,
    /// Data file; defaults to `<name>.tsv` when loading.
    pub path: Option<String>,
}

impl FactorDecl {
    pub fn data_path(&self) -> String {
        self.path.clone().unwrap_or_else(|| format!("{}.tsv", self.name))
    }
}

/// What a validation failure refers to, so parsers can attach positions.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Locus {
    Context,
    Variable(usize),
    Factor(usize),
    End,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FaqQuery {
    pub context: String,
    /// Free variables first, then bound variables in aggregate order.
    pub variables: Vec<VariableDecl>,
    pub factors: Vec<FactorDecl>,
}

impl FaqQuery {
    pub fn new(context: &str) -> FaqQuery {
        FaqQuery {
            context: context.to_string(),
            variables: vec![],
            factors: vec![],
        }
    }

    pub fn free(mut self, name: &str) -> Self {
        self.variables.push(VariableDecl {
            name: name.to_string(),
            aggregate: None,
            domain: None,
        });
        self
    }

    pub fn bound(mut self, name: &str, aggregate: &str) -> Self {
        self.variables.push(VariableDecl {
            name: name.to_string(),
            aggregate: Some(aggregate.to_string()),
            domain: None,
        });
        self
    }

    /// Declares an explicit domain for the most recently added variable.
    pub fn with_domain<S: ToString>(mut self, values: impl IntoIterator<Item = S>) -> Self {
        let last = self.variables.last_mut().expect("no variable to attach a domain to");
        last.domain = Some(values.into_iter().map(|v| v.to_string()).collect());
        self
    }

    pub fn factor(mut self, name: &str, vars: &[&str]) -> Self {
        self.factors.push(FactorDecl {
            name: name.to_string(),
            vars: vars.iter().map(|v| v.to_string()).collect(),
            path: None,
        });
        self
    }

    pub fn num_vars(&self) -> usize {
        self.variables.len()
    }

    /// Number of free variables, the prefix of `variables`.
    pub fn free_len(&self) -> usize {
        self.variables.iter().take_while(|v| v.aggregate.is_none()).count()
    }

    pub fn var_index(&self, name: &str) -> Option<VarId> {
        self.variables.iter().position(|v| v.name == name)
    }

    pub fn var_name(&self, v: VarId) -> &str {
        &self.variables[v].name
    }

    pub fn context(&self) -> Result<SemiringContext> {
        SemiringContext::named(&self.context)
    }

    /// Variable ids of each factor's edge, in declared column order.
    pub fn factor_vars(&self, i: usize) -> Vec<VarId> {
        self.factors[i]
            .vars
            .iter()
            .map(|n| self.var_index(n).expect("validated query"))
            .collect()
    }

    /// Variables that occur in no factor.
    pub fn isolated_vars(&self) -> Vec<VarId> {
        let used: BTreeSet<&str> = self.factors.iter().flat_map(|f| f.vars.iter().map(String::as_str)).collect();
        (0..self.num_vars())
            .filter(|&v| !used.contains(self.var_name(v)))
            .collect()
    }

    /// Aggregate of each variable; `None` for free variables.
    pub fn aggregates(&self, ctx: &SemiringContext) -> Result<Vec<Option<Aggregate>>> {
        self.variables
            .iter()
            .map(|v| v.aggregate.as_deref().map(|a| ctx.aggregate(a).cloned()).transpose())
            .collect()
    }

    /// `true` for variables under a product aggregate.
    pub fn product_mask(&self) -> Result<Vec<bool>> {
        let ctx = self.context()?;
        Ok(self
            .aggregates(&ctx)?
            .iter()
            .map(|a| a.as_ref().is_some_and(Aggregate::is_product))
            .collect())
    }

    /// The query hypergraph: factor `i` is edge `i`; each isolated variable
    /// gets a unary domain edge, numbered after the factors in variable order.
    pub fn hypergraph(&self) -> Result<Hypergraph> {
        let mut edges: Vec<Vec<VarId>> = (0..self.factors.len()).map(|i| self.factor_vars(i)).collect();
        edges.extend(self.isolated_vars().into_iter().map(|v| vec![v]));
        Hypergraph::new(0..self.num_vars(), edges)
    }

    pub fn validate(&self) -> Result<()> {
        self.check().map_err(|(_, e)| e)
    }

    /// Validation with the location of the first problem.
    pub fn check(&self) -> std::result::Result<(), (Locus, FaqError)> {
        let ctx = SemiringContext::named(&self.context).map_err(|e| (Locus::Context, e))?;
        let invalid = |locus, msg: String| (locus, FaqError::InvalidQuery(msg));
        let mut seen: HashMap<&str, usize> = HashMap::new();
        let mut bound_seen = false;
        let mut semiring = false;
        for (i, v) in self.variables.iter().enumerate() {
            if seen.insert(v.name.as_str(), i).is_some() {
                return Err(invalid(Locus::Variable(i), format!("variable `{}` declared twice", v.name)));
            }
            match &v.aggregate {
                None if bound_seen => {
                    return Err(invalid(
                        Locus::Variable(i),
                        format!("free variable `{}` declared after a bound variable", v.name),
                    ))
                }
                None => {}
                Some(name) => {
                    bound_seen = true;
                    let agg = ctx.aggregate(name).map_err(|e| (Locus::Variable(i), e))?;
                    semiring |= agg.is_semiring();
                    if agg.is_product() && v.domain.is_none() {
                        return Err((
                            Locus::Variable(i),
                            FaqError::ActiveDomain(v.name.clone()),
                        ));
                    }
                }
            }
            if let Some(dom) = &v.domain {
                if dom.is_empty() {
                    return Err(invalid(Locus::Variable(i), format!("variable `{}` has an empty domain", v.name)));
                }
                let distinct: BTreeSet<&String> = dom.iter().collect();
                if distinct.len() != dom.len() {
                    return Err(invalid(
                        Locus::Variable(i),
                        format!("domain of `{}` repeats a value", v.name),
                    ));
                }
            }
        }
        if bound_seen && !semiring {
            return Err((Locus::End, FaqError::NoSemiringAggregate));
        }
        let mut names = BTreeSet::new();
        for (i, f) in self.factors.iter().enumerate() {
            if !names.insert(f.name.as_str()) {
                return Err(invalid(Locus::Factor(i), format!("factor `{}` declared twice", f.name)));
            }
            if f.vars.is_empty() {
                return Err(invalid(Locus::Factor(i), format!("factor `{}` has no variables", f.name)));
            }
            let mut vars = BTreeSet::new();
            for v in &f.vars {
                if !seen.contains_key(v.as_str()) {
                    return Err(invalid(
                        Locus::Factor(i),
                        format!("factor `{}` uses undeclared variable `{v}`", f.name),
                    ));
                }
                if !vars.insert(v) {
                    return Err(invalid(
                        Locus::Factor(i),
                        format!("factor `{}` repeats variable `{v}`", f.name),
                    ));
                }
            }
        }
        for v in self.isolated_vars() {
            if self.variables[v].domain.is_none() {
                return Err(invalid(
                    Locus::Variable(v),
                    format!("variable `{}` is in no factor and has no domain", self.var_name(v)),
                ));
            }
        }
        Ok(())
    }
}

/// Orders values as integers when both parse as integers (integers first),
/// otherwise as strings.
pub fn natural_cmp(a: &str, b: &str) -> Ordering {
    match (a.parse::<BigInt>(), b.parse::<BigInt>()) {
        (Ok(x), Ok(y)) => x.cmp(&y).then_with(|| a.cmp(b)),
        (Ok(_), Err(_)) => Ordering::Less,
        (Err(_), Ok(_)) => Ordering::Greater,
        (Err(_), Err(_)) => a.cmp(b),
    }
}

/// Sorted value dictionary of one variable; codes are indices.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Dictionary {
    values: Vec<String>,
}

impl Dictionary {
    pub fn new(values: impl IntoIterator<Item = String>) -> Dictionary {
        let mut values: Vec<String> = values.into_iter().collect();
        values.sort_by(|a, b| natural_cmp(a, b));
        values.dedup();
        Dictionary { values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn encode(&self, value: &str) -> Option<u32> {
        self.values
            .binary_search_by(|v| natural_cmp(v, value))
            .ok()
            .map(|i| i as u32)
    }

    pub fn decode(&self, code: u32) -> &str {
        &self.values[code as usize]
    }

    pub fn values(&self) -> &[String] {
        &self.values
    }
}

/// Rows of one factor before dictionary encoding, columns in declared order.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RawTable {
    pub rows: Vec<(Vec<String>, Value)>,
}

impl RawTable {
    pub fn push<S: ToString>(&mut self, key: impl IntoIterator<Item = S>, value: Value) {
        self.rows.push((key.into_iter().map(|k| k.to_string()).collect(), value));
    }
}

/// A validated query bound to encoded data.
#[derive(Clone, Debug)]
pub struct Instance {
    pub query: FaqQuery,
    pub ctx: SemiringContext,
    pub aggregates: Vec<Option<Aggregate>>,
    pub dictionaries: Vec<Dictionary>,
    pub domains: Vec<VariableDomain>,
    /// One factor per declared factor, in declaration order.
    pub factors: Vec<Factor>,
}

impl Instance {
    /// `tables[i]` holds the rows of `query.factors[i]`.
    pub fn build(query: FaqQuery, tables: Vec<RawTable>) -> Result<Instance> {
        query.validate()?;
        let ctx = query.context()?;
        if tables.len() != query.factors.len() {
            return Err(FaqError::InvalidQuery(format!(
                "expected {} tables, got {}",
                query.factors.len(),
                tables.len()
            )));
        }
        let aggregates = query.aggregates(&ctx)?;
        let mut values: Vec<BTreeSet<String>> = vec![BTreeSet::new(); query.num_vars()];
        for (i, table) in tables.iter().enumerate() {
            let vars = query.factor_vars(i);
            for (key, _) in &table.rows {
                if key.len() != vars.len() {
                    return Err(FaqError::ArityMismatch {
                        factor: query.factors[i].name.clone(),
                        expected: vars.len(),
                        found: key.len(),
                    });
                }
                for (&v, text) in vars.iter().zip(key) {
                    match &query.variables[v].domain {
                        Some(dom) if !dom.contains(text) => {
                            return Err(FaqError::OutsideDomain {
                                value: text.clone(),
                                var: query.var_name(v).to_string(),
                            })
                        }
                        Some(_) => {}
                        None => {
                            values[v].insert(text.clone());
                        }
                    }
                }
            }
        }
        let dictionaries: Vec<Dictionary> = query
            .variables
            .iter()
            .zip(values)
            .map(|(decl, active)| match &decl.domain {
                Some(dom) => Dictionary::new(dom.iter().cloned()),
                None => Dictionary::new(active),
            })
            .collect();
        let domains = query
            .variables
            .iter()
            .enumerate()
            .map(|(v, decl)| VariableDomain {
                var: v,
                kind: match decl.domain {
                    Some(_) => DomainKind::Explicit(dictionaries[v].len() as u32),
                    None => DomainKind::Active,
                },
            })
            .collect();
        let mut factors = Vec::with_capacity(tables.len());
        for (i, table) in tables.into_iter().enumerate() {
            let vars = query.factor_vars(i);
            let rows = table
                .rows
                .into_iter()
                .map(|(key, value)| {
                    let codes = vars
                        .iter()
                        .zip(&key)
                        .map(|(&v, text)| dictionaries[v].encode(text).expect("value was collected"))
                        .collect();
                    (codes, value)
                })
                .collect();
            factors.push(build_factor(&query.factors[i].name, &vars, rows, &ctx)?);
        }
        Ok(Instance {
            query,
            ctx,
            aggregates,
            dictionaries,
            domains,
            factors,
        })
    }

    pub fn num_vars(&self) -> usize {
        self.query.num_vars()
    }

    pub fn free_len(&self) -> usize {
        self.query.free_len()
    }

    /// Size of the enumeration domain of `v`.
    pub fn domain_size(&self, v: VarId) -> usize {
        self.dictionaries[v].len()
    }

    /// The all-ones unary factor over an isolated variable's explicit domain.
    pub fn domain_factor(&self, v: VarId) -> Factor {
        let rows = (0..self.domain_size(v) as u32)
            .map(|c| (vec![c], self.ctx.one.clone()))
            .collect();
        build_factor(&format!("dom_{}", self.query.var_name(v)), &[v], rows, &self.ctx)
            .expect("codes are distinct")
    }

    /// Input factors followed by the domain factors of isolated variables,
    /// aligned with [`FaqQuery::hypergraph`].
    pub fn hypergraph_factors(&self) -> Vec<Factor> {
        let mut out = self.factors.clone();
        out.extend(self.query.isolated_vars().into_iter().map(|v| self.domain_factor(v)));
        out
    }

    pub fn decode(&self, v: VarId, code: u32) -> &str {
        self.dictionaries[v].decode(code)
    }
}
