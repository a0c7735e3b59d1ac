use std::fmt::Write as _;
use std::path::Path;

use faq_core::algebra::Value;
use faq_core::reductions::{
    map_exhaustive, map_instance, matrix_chain_product, mcm_instance, qcq_count_exhaustive, qcq_count_instance,
    Quantifier, Relation, Reduction, Table,
};
use faq_core::{FaqError, Result};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use crate::Problem;

/// Writes `query.faq`, the factor files and `expected.tsv` (the answer
/// computed without the engine) into `dir`.
pub(crate) fn write_demo(problem: Problem, dir: &Path, seed: u64) -> Result<()> {
    let mut rng = StdRng::seed_from_u64(seed);
    let (reduction, expected) = match problem {
        Problem::Mcm => mcm(&mut rng)?,
        Problem::Map => map(&mut rng)?,
        Problem::Qcq => qcq(&mut rng)?,
    };
    reduction.write_files(dir)?;
    let path = dir.join("expected.tsv");
    std::fs::write(&path, expected).map_err(|source| FaqError::Io { path, source })
}

fn mcm(rng: &mut StdRng) -> Result<(Reduction, String)> {
    let len = rng.gen_range(2..=4);
    let dims: Vec<usize> = (0..=len).map(|_| rng.gen_range(1..=4)).collect();
    let matrices: Vec<Vec<Vec<i64>>> = dims
        .windows(2)
        .map(|d| (0..d[0]).map(|_| (0..d[1]).map(|_| rng.gen_range(-3..=3)).collect()).collect())
        .collect();
    let product = matrix_chain_product(&matrices)?;
    let mut expected = String::new();
    for (r, row) in product.iter().enumerate() {
        for (c, v) in row.iter().enumerate() {
            if *v != 0.into() {
                writeln!(expected, "{r}\t{c}\t{v}").unwrap();
            }
        }
    }
    Ok((mcm_instance(&matrices)?, expected))
}

fn map(rng: &mut StdRng) -> Result<(Reduction, String)> {
    let mut factors = Vec::new();
    for (name, vars) in [("P", ["a", "b"]), ("Q", ["b", "c"]), ("R", ["c", "d"])] {
        let mut rows = Vec::new();
        for x in 0..3 {
            for y in 0..3 {
                if rng.gen_bool(0.7) {
                    let v = Value::rat(rng.gen_range(1..=9), rng.gen_range(1..=3));
                    rows.push((vec![x.to_string(), y.to_string()], v));
                }
            }
        }
        factors.push(Table {
            name: name.into(),
            vars: vars.iter().map(|s| s.to_string()).collect(),
            rows,
        });
    }
    let (free, bound) = (["a"], ["b", "c", "d"]);
    let mut expected = String::new();
    for (key, v) in map_exhaustive(&free, &bound, &factors) {
        writeln!(expected, "{}\t{v}", key.join("\t")).unwrap();
    }
    Ok((map_instance(&free, &bound, &factors)?, expected))
}

fn qcq(rng: &mut StdRng) -> Result<(Reduction, String)> {
    let mut relations = Vec::new();
    for (name, vars) in [("R", ["x", "y"]), ("S", ["y", "z"])] {
        let tuples = (0..4)
            .filter(|_| rng.gen_bool(0.6))
            .map(|bits| vec![bits & 2 != 0, bits & 1 != 0])
            .collect();
        relations.push(Relation {
            name: name.into(),
            vars: vars.iter().map(|s| s.to_string()).collect(),
            tuples,
        });
    }
    let free = ["x"];
    let quantifiers = [(Quantifier::Exists, "y"), (Quantifier::ForAll, "z")];
    let expected = format!("{}\n", qcq_count_exhaustive(&free, &quantifiers, &relations));
    Ok((qcq_count_instance(&free, &quantifiers, &relations)?, expected))
}
