//! Encodings of classic problems as FAQ queries, each paired with a direct
//! solver used to cross-check the engine.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::algebra::Value;
use crate::error::{FaqError, Result};
use crate::factor::Factor;
use crate::frontend::print_query;
use crate::query::{FaqQuery, Instance, RawTable};

/// A query together with the rows of each of its factors.
#[derive(Clone, Debug)]
pub struct Reduction {
    pub query: FaqQuery,
    pub tables: Vec<RawTable>,
}

impl Reduction {
    pub fn instance(&self) -> Result<Instance> {
        Instance::build(self.query.clone(), self.tables.clone())
    }

    /// Writes `query.faq` plus one TSV per factor into `dir`.
    pub fn write_files(&self, dir: &Path) -> Result<()> {
        let io = |path: &Path| {
            let path = path.to_path_buf();
            move |source| FaqError::Io { path, source }
        };
        std::fs::create_dir_all(dir).map_err(io(dir))?;
        let query_path = dir.join("query.faq");
        std::fs::write(&query_path, print_query(&self.query)).map_err(io(&query_path))?;
        for (decl, table) in self.query.factors.iter().zip(&self.tables) {
            let mut text = String::new();
            for (key, value) in &table.rows {
                for k in key {
                    text.push_str(k);
                    text.push('\t');
                }
                text.push_str(&value.to_string());
                text.push('\n');
            }
            let path = dir.join(decl.data_path());
            std::fs::write(&path, text).map_err(io(&path))?;
        }
        Ok(())
    }
}

/// Row-major integer matrix.
pub type Matrix = Vec<Vec<i64>>;

fn shape(m: &Matrix) -> Result<(usize, usize)> {
    let rows = m.len();
    let cols = m.first().map_or(0, Vec::len);
    if rows == 0 || cols == 0 || m.iter().any(|r| r.len() != cols) {
        return Err(FaqError::InvalidQuery("matrices must be non-empty and rectangular".into()));
    }
    Ok((rows, cols))
}

fn chain_dims(matrices: &[Matrix]) -> Result<Vec<usize>> {
    if matrices.is_empty() {
        return Err(FaqError::InvalidQuery("empty matrix chain".into()));
    }
    let mut dims = vec![shape(&matrices[0])?.0];
    for (i, m) in matrices.iter().enumerate() {
        let (r, c) = shape(m)?;
        if r != dims[i] {
            return Err(FaqError::InvalidQuery(format!(
                "matrix {} has {r} rows but the previous one has {} columns",
                i + 1,
                dims[i]
            )));
        }
        dims.push(c);
    }
    Ok(dims)
}

/// `M1 · … · Mn` as a sum-product query over `x1, …, x(n+1)` with the two
/// endpoints free and every interior index summed.
pub fn mcm_instance(matrices: &[Matrix]) -> Result<Reduction> {
    let dims = chain_dims(matrices)?;
    let n = matrices.len();
    let var = |i: usize| format!("x{}", i + 1);
    let mut query = FaqQuery::new("rat-sum-prod").free(&var(0)).with_domain(0..dims[0]);
    query = query.free(&var(n)).with_domain(0..dims[n]);
    for (i, &dim) in dims.iter().enumerate().take(n).skip(1) {
        query = query.bound(&var(i), "sum").with_domain(0..dim);
    }
    let mut tables = Vec::with_capacity(n);
    for (i, m) in matrices.iter().enumerate() {
        query = query.factor(&format!("M{}", i + 1), &[&var(i), &var(i + 1)]);
        let mut t = RawTable::default();
        for (r, row) in m.iter().enumerate() {
            for (c, &v) in row.iter().enumerate() {
                if v != 0 {
                    t.push([r, c], Value::rat(v, 1));
                }
            }
        }
        tables.push(t);
    }
    Ok(Reduction { query, tables })
}

/// Dense matrix from the output factor of an [`mcm_instance`] query; absent
/// entries are 0.
pub fn mcm_decode(inst: &Instance, output: &Factor, rows: usize, cols: usize) -> Result<Vec<Vec<BigInt>>> {
    let mut dense = vec![vec![BigInt::zero(); cols]; rows];
    if output.edge() != [0, 1] {
        return Err(FaqError::Internal("matrix output must range over both endpoints".into()));
    }
    let index = |v: usize, code: u32| -> Result<usize> {
        inst.decode(v, code)
            .parse()
            .map_err(|_| FaqError::Internal(format!("non-numeric matrix index `{}`", inst.decode(v, code))))
    };
    for (key, value) in output.rows() {
        let (r, c) = (index(0, key[0])?, index(1, key[1])?);
        let q = value.as_rational().filter(|q| q.is_integer()).ok_or_else(|| {
            FaqError::Internal(format!("matrix entry {value} is not an integer"))
        })?;
        *dense
            .get_mut(r)
            .and_then(|row| row.get_mut(c))
            .ok_or_else(|| FaqError::Internal(format!("matrix index ({r},{c}) out of range")))? = q.to_integer();
    }
    Ok(dense)
}

/// Left-to-right schoolbook multiplication.
pub fn matrix_chain_product(matrices: &[Matrix]) -> Result<Vec<Vec<BigInt>>> {
    chain_dims(matrices)?;
    let mut acc: Vec<Vec<BigInt>> = matrices[0]
        .iter()
        .map(|row| row.iter().map(|&v| BigInt::from(v)).collect())
        .collect();
    for m in &matrices[1..] {
        let cols = m[0].len();
        acc = acc
            .iter()
            .map(|row| {
                (0..cols)
                    .map(|c| row.iter().zip(m).map(|(a, mrow)| a * mrow[c]).sum())
                    .collect()
            })
            .collect();
    }
    Ok(acc)
}

/// A named table over string-valued variables.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub name: String,
    pub vars: Vec<String>,
    pub rows: Vec<(Vec<String>, Value)>,
}

fn active_domains(vars: &[String], tables: &[Table]) -> BTreeMap<String, BTreeSet<String>> {
    let mut doms: BTreeMap<String, BTreeSet<String>> = vars.iter().map(|v| (v.clone(), BTreeSet::new())).collect();
    for t in tables {
        for (key, _) in &t.rows {
            for (v, k) in t.vars.iter().zip(key) {
                doms.entry(v.clone()).or_default().insert(k.clone());
            }
        }
    }
    doms
}

/// Maximum a posteriori estimates: the product of all factors maximized over
/// the `bound` variables, per assignment of `free`. Factor values must be
/// nonnegative rationals.
pub fn map_instance(free: &[&str], bound: &[&str], factors: &[Table]) -> Result<Reduction> {
    let mut query = FaqQuery::new("max-prod");
    for v in free {
        query = query.free(v);
    }
    for v in bound {
        query = query.bound(v, "max");
    }
    let mut tables = Vec::new();
    for f in factors {
        let vars: Vec<&str> = f.vars.iter().map(String::as_str).collect();
        query = query.factor(&f.name, &vars);
        let mut t = RawTable::default();
        for (key, value) in &f.rows {
            let q = value
                .as_rational()
                .filter(|q| *q >= BigRational::zero())
                .ok_or_else(|| FaqError::ValueOutsideCarrier {
                    value: value.to_string(),
                    carrier: "nonnegative rationals".into(),
                })?;
            t.push(key, Value::Rat(q));
        }
        tables.push(t);
    }
    Ok(Reduction { query, tables })
}

fn assignments(vars: &[String], doms: &BTreeMap<String, BTreeSet<String>>) -> Vec<BTreeMap<String, String>> {
    let mut out = vec![BTreeMap::new()];
    for v in vars {
        out = out
            .into_iter()
            .flat_map(|a| {
                doms[v].iter().map(move |x| {
                    let mut a = a.clone();
                    a.insert(v.clone(), x.clone());
                    a
                })
            })
            .collect();
    }
    out
}

fn table_value(t: &Table, a: &BTreeMap<String, String>) -> Option<BigRational> {
    t.rows
        .iter()
        .find(|(key, _)| t.vars.iter().zip(key).all(|(v, k)| a[v] == *k))
        .and_then(|(_, v)| v.as_rational())
}

/// Exhaustive MAP over the active domains; zero results are omitted.
pub fn map_exhaustive(free: &[&str], bound: &[&str], factors: &[Table]) -> BTreeMap<Vec<String>, Value> {
    let all: Vec<String> = free.iter().chain(bound).map(|s| s.to_string()).collect();
    let doms = active_domains(&all, factors);
    let mut best: BTreeMap<Vec<String>, BigRational> = BTreeMap::new();
    for a in assignments(&all, &doms) {
        let mut p = BigRational::one();
        for t in factors {
            p *= table_value(t, &a).unwrap_or_else(BigRational::zero);
        }
        if p.is_zero() {
            continue;
        }
        let key: Vec<String> = free.iter().map(|v| a[*v].clone()).collect();
        let entry = best.entry(key).or_insert_with(BigRational::zero);
        if p > *entry {
            *entry = p;
        }
    }
    best.into_iter().map(|(k, v)| (k, Value::Rat(v))).collect()
}

/// Output factor keyed by decoded free-variable values.
pub fn decode_output(inst: &Instance, output: &Factor) -> BTreeMap<Vec<String>, Value> {
    output
        .rows()
        .iter()
        .map(|(key, value)| {
            let k = output
                .edge()
                .iter()
                .zip(key.iter())
                .map(|(&v, &c)| inst.decode(v, c).to_string())
                .collect();
            (k, value.clone())
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Quantifier {
    Exists,
    ForAll,
}

/// A Boolean relation given by its satisfying tuples.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Relation {
    pub name: String,
    pub vars: Vec<String>,
    pub tuples: Vec<Vec<bool>>,
}

fn bit(b: bool) -> &'static str {
    if b {
        "1"
    } else {
        "0"
    }
}

/// Counts the assignments of `free` satisfying
/// `Q1 y1 … Qk yk . R1 ∧ … ∧ Rm` over Boolean domains. The free variables
/// are summed, `∃` becomes `max` and `∀` the product aggregate, so the
/// answer is a scalar.
pub fn qcq_count_instance(
    free: &[&str],
    quantifiers: &[(Quantifier, &str)],
    relations: &[Relation],
) -> Result<Reduction> {
    let mut query = FaqQuery::new("nat-sum-prod");
    for v in free {
        query = query.bound(v, "sum").with_domain(["0", "1"]);
    }
    for (q, v) in quantifiers {
        let agg = match q {
            Quantifier::Exists => "max",
            Quantifier::ForAll => "prod",
        };
        query = query.bound(v, agg).with_domain(["0", "1"]);
    }
    let mut tables = Vec::new();
    for r in relations {
        let vars: Vec<&str> = r.vars.iter().map(String::as_str).collect();
        query = query.factor(&r.name, &vars);
        let mut t = RawTable::default();
        let distinct: BTreeSet<&Vec<bool>> = r.tuples.iter().collect();
        for tuple in distinct {
            if tuple.len() != r.vars.len() {
                return Err(FaqError::ArityMismatch {
                    factor: r.name.clone(),
                    expected: r.vars.len(),
                    found: tuple.len(),
                });
            }
            t.push(tuple.iter().map(|&b| bit(b)), Value::int(1));
        }
        tables.push(t);
    }
    Ok(Reduction { query, tables })
}

/// Direct quantifier evaluation over every free assignment.
pub fn qcq_count_exhaustive(free: &[&str], quantifiers: &[(Quantifier, &str)], relations: &[Relation]) -> u64 {
    fn holds(relations: &[Relation], a: &BTreeMap<&str, bool>) -> bool {
        relations.iter().all(|r| {
            r.tuples
                .iter()
                .any(|t| r.vars.iter().zip(t).all(|(v, &b)| a[v.as_str()] == b))
        })
    }
    fn eval<'a>(
        quantifiers: &[(Quantifier, &'a str)],
        relations: &[Relation],
        a: &mut BTreeMap<&'a str, bool>,
    ) -> bool {
        let Some(((q, v), rest)) = quantifiers.split_first() else {
            return holds(relations, a);
        };
        let mut branch = |b: bool| {
            a.insert(v, b);
            eval(rest, relations, a)
        };
        match q {
            Quantifier::Exists => branch(false) || branch(true),
            Quantifier::ForAll => branch(false) && branch(true),
        }
    }
    let mut count = 0;
    for bits in 0..1u64 << free.len() {
        let mut a: BTreeMap<&str, bool> = free.iter().enumerate().map(|(i, v)| (*v, bits >> i & 1 == 1)).collect();
        if eval(quantifiers, relations, &mut a) {
            count += 1;
        }
    }
    count
}
