//! Tab-separated factor files and output tables.
//!
//! Each data line holds one column per edge variable, in declared order,
//! followed by the value. Blank lines and lines starting with `#` are
//! skipped.

use std::fmt::Write;
use std::path::Path;

use crate::algebra::SemiringContext;
use crate::error::{FaqError, Result};
use crate::factor::Factor;
use crate::query::{FactorDecl, FaqQuery, Instance, RawTable};

pub fn parse_factor_table(
    text: &str,
    path: &Path,
    decl: &FactorDecl,
    ctx: &SemiringContext,
    header: bool,
) -> Result<RawTable> {
    let mut table = RawTable::default();
    let mut skip_header = header;
    for (i, line) in text.lines().enumerate() {
        let line = line.strip_suffix('\r').unwrap_or(line);
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        if std::mem::take(&mut skip_header) {
            continue;
        }
        let data_error = |message: String| FaqError::Data {
            path: path.to_path_buf(),
            line: i + 1,
            message,
        };
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != decl.vars.len() + 1 {
            return Err(data_error(format!(
                "factor {} expects {} columns, found {}",
                decl.name,
                decl.vars.len() + 1,
                fields.len()
            )));
        }
        let (key, value) = fields.split_at(decl.vars.len());
        let value = ctx.parse_value(value[0]).map_err(|e| data_error(e.to_string()))?;
        table.push(key.iter().map(|k| k.trim()), value);
    }
    Ok(table)
}

pub fn load_factor_table(path: &Path, decl: &FactorDecl, ctx: &SemiringContext, header: bool) -> Result<RawTable> {
    let text = std::fs::read_to_string(path).map_err(|source| FaqError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_factor_table(&text, path, decl, ctx, header)
}

/// Loads every factor's file relative to `data_dir` and encodes the instance.
pub fn load_instance(query: &FaqQuery, data_dir: &Path, header: bool) -> Result<Instance> {
    query.validate()?;
    let ctx = query.context()?;
    let tables = query
        .factors
        .iter()
        .map(|f| load_factor_table(&data_dir.join(f.data_path()), f, &ctx, header))
        .collect::<Result<Vec<_>>>()?;
    Instance::build(query.clone(), tables)
}

/// Free-variable columns in declaration order, then the value; one line per
/// nonzero row in key order. A query without free variables prints its
/// scalar, zero included.
pub fn format_output(inst: &Instance, output: &Factor) -> String {
    let mut out = String::new();
    if output.edge().is_empty() {
        writeln!(out, "{}", output.scalar_value(&inst.ctx)).unwrap();
        return out;
    }
    for (key, value) in output.rows() {
        for (&v, &code) in output.edge().iter().zip(key.iter()) {
            out.push_str(inst.decode(v, code));
            out.push('\t');
        }
        writeln!(out, "{value}").unwrap();
    }
    out
}
