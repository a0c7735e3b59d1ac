//! Seeded random query instances for differential tests and benchmarks.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::algebra::{Carrier, Value};
use crate::error::Result;
use crate::query::{FaqQuery, Instance, RawTable};

#[derive(Clone, Debug)]
pub struct RandomConfig {
    pub contexts: Vec<String>,
    pub max_vars: usize,
    pub max_free: usize,
    pub max_domain: usize,
    pub max_factors: usize,
    pub max_arity: usize,
    pub max_rows: usize,
    /// Chance that a bound variable gets a product aggregate.
    pub product_probability: f64,
    /// Chance that a row of the full domain product is kept.
    pub density: f64,
}

impl Default for RandomConfig {
    fn default() -> Self {
        RandomConfig {
            contexts: ["bool-or-and", "nat-sum-prod", "max-prod"].map(String::from).to_vec(),
            max_vars: 6,
            max_free: 2,
            max_domain: 4,
            max_factors: 5,
            max_arity: 3,
            max_rows: 40,
            product_probability: 0.2,
            density: 0.6,
        }
    }
}

fn random_value<R: Rng>(rng: &mut R, carrier: Carrier) -> Value {
    match carrier {
        Carrier::Bool => Value::Bool(true),
        Carrier::Nat | Carrier::Int => Value::int(rng.gen_range(1..=4)),
        Carrier::Rat | Carrier::NonNegRat => Value::rat(rng.gen_range(1..=6), rng.gen_range(1..=3)),
        Carrier::ExtRat => Value::ext(rng.gen_range(-3..=3), 1),
    }
}

/// A random valid query with matching tables.
pub fn random_query<R: Rng>(rng: &mut R, cfg: &RandomConfig) -> Result<(FaqQuery, Vec<RawTable>)> {
    let context = cfg.contexts.choose(rng).expect("at least one context").clone();
    let mut query = FaqQuery::new(&context);
    let ctx = query.context()?;
    let n = rng.gen_range(1..=cfg.max_vars);
    let free = rng.gen_range(0..=cfg.max_free.min(n));
    let semiring: Vec<&str> = ctx.aggregates.iter().filter(|a| a.is_semiring()).map(|a| a.name.as_str()).collect();
    let product: Vec<&str> = ctx.aggregates.iter().filter(|a| a.is_product()).map(|a| a.name.as_str()).collect();
    let mut aggs: Vec<Option<&str>> = (0..n)
        .map(|i| {
            if i < free {
                None
            } else if !product.is_empty() && rng.gen_bool(cfg.product_probability) {
                Some(*product.choose(rng).unwrap())
            } else {
                Some(*semiring.choose(rng).unwrap())
            }
        })
        .collect();
    if n > free && aggs[free..].iter().all(|a| product.contains(&a.unwrap())) {
        let i = rng.gen_range(free..n);
        aggs[i] = Some(*semiring.choose(rng).unwrap());
    }
    let sizes: Vec<usize> = (0..n).map(|_| rng.gen_range(1..=cfg.max_domain)).collect();
    let names: Vec<String> = (0..n).map(|i| format!("v{i}")).collect();

    let m = rng.gen_range(1..=cfg.max_factors);
    let mut edges: Vec<Vec<usize>> = Vec::with_capacity(m);
    for _ in 0..m {
        let arity = rng.gen_range(1..=cfg.max_arity.min(n));
        let mut vars: Vec<usize> = (0..n).collect();
        vars.shuffle(rng);
        vars.truncate(arity);
        edges.push(vars);
    }
    let covered: BTreeSet<usize> = edges.iter().flatten().copied().collect();
    for (i, agg) in aggs.iter().enumerate() {
        let is_product = agg.is_some_and(|a| product.contains(&a));
        let explicit = is_product || !covered.contains(&i) || rng.gen_bool(0.3);
        query = match agg {
            None => query.free(&names[i]),
            Some(a) => query.bound(&names[i], a),
        };
        if explicit {
            query = query.with_domain(0..sizes[i]);
        }
    }

    let mut tables = Vec::with_capacity(m);
    for (j, edge) in edges.iter().enumerate() {
        let vars: Vec<&str> = edge.iter().map(|&v| names[v].as_str()).collect();
        query = query.factor(&format!("F{j}"), &vars);
        let mut table = RawTable::default();
        let mut key = vec![0usize; edge.len()];
        'rows: loop {
            if table.rows.len() < cfg.max_rows && rng.gen_bool(cfg.density) {
                table.push(key.iter(), random_value(rng, ctx.carrier));
            }
            for k in 0..key.len() {
                key[k] += 1;
                if key[k] < sizes[edge[k]] {
                    continue 'rows;
                }
                key[k] = 0;
            }
            break;
        }
        tables.push(table);
    }
    Ok((query, tables))
}

pub fn random_instance<R: Rng>(rng: &mut R, cfg: &RandomConfig) -> Result<Instance> {
    let (query, tables) = random_query(rng, cfg)?;
    Instance::build(query, tables)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn instances_respect_limits() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let cfg = RandomConfig::default();
        for _ in 0..200 {
            let inst = random_instance(&mut rng, &cfg).unwrap();
            assert!(inst.num_vars() <= cfg.max_vars);
            assert!(inst.factors.len() <= cfg.max_factors);
            assert!(inst.factors.iter().all(|f| f.rows().len() <= cfg.max_rows));
            assert!((0..inst.num_vars()).all(|v| inst.domain_size(v) <= cfg.max_domain));
        }
    }
}
