//! Canonical query printer; its output parses back to the same query.

use std::fmt::Write;

use super::parse::is_word_char;
use crate::query::{FaqQuery, VariableDecl};

fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\t' => out.push_str("\\t"),
            _ => out.push(c),
        }
    }
    out.push('"');
    out
}

fn value(s: &str) -> String {
    if !s.is_empty() && s.chars().all(is_word_char) {
        s.to_string()
    } else {
        quote(s)
    }
}

fn declaration(v: &VariableDecl) -> String {
    match &v.domain {
        None => v.name.clone(),
        Some(dom) => {
            let values: Vec<String> = dom.iter().map(|d| value(d)).collect();
            format!("{} in {{{}}}", v.name, values.join(", "))
        }
    }
}

pub fn print_query(q: &FaqQuery) -> String {
    let mut out = String::new();
    writeln!(out, "context {};", q.context).unwrap();
    let free: Vec<String> = q.variables[..q.free_len()].iter().map(declaration).collect();
    if !free.is_empty() {
        writeln!(out, "free {};", free.join(", ")).unwrap();
    }
    for v in &q.variables[q.free_len()..] {
        writeln!(out, "{} {};", v.aggregate.as_deref().unwrap_or_default(), declaration(v)).unwrap();
    }
    for f in &q.factors {
        write!(out, "factor {}({})", f.name, f.vars.join(", ")).unwrap();
        if let Some(path) = &f.path {
            write!(out, " from {}", quote(path)).unwrap();
        }
        out.push_str(";\n");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::parse_query;
    use crate::random::{random_query, RandomConfig};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn print_parse_fixpoint() {
        let text = "context max-prod;\nfree x in {\"a b\", \"q\\\"\", 3};\nmax y;\nsum z in {1};\nfactor R(x, y) from \"data/r.tsv\";\nfactor S(y, z);\n";
        let q = parse_query(text).unwrap();
        let printed = print_query(&q);
        assert_eq!(parse_query(&printed).unwrap(), q);
        assert_eq!(print_query(&parse_query(&printed).unwrap()), printed);

        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..200 {
            let (q, _) = random_query(&mut rng, &RandomConfig::default()).unwrap();
            let printed = print_query(&q);
            assert_eq!(parse_query(&printed).unwrap(), q, "{printed}");
        }
    }
}
