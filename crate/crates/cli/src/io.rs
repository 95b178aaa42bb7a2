use std::fs;
use std::io::{self, Read, Write};
use std::path::Path;
use std::sync::Arc;

use anyhow::{anyhow, bail, Context, Result};
use quolat::certlang::ParseError;
use quolat::{GroundSet, Relation, RelationJson};
use serde_json::Value;

pub fn read_input(path: &Path) -> Result<String> {
    if path.as_os_str() == "-" {
        let mut text = String::new();
        io::stdin().read_to_string(&mut text).context("reading standard input")?;
        Ok(text)
    } else {
        fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
    }
}

fn relation(json: Value, ground: Option<&Arc<GroundSet>>) -> Result<Relation> {
    let json: RelationJson = serde_json::from_value(json).context("expected a relation object")?;
    Ok(Relation::from_json(&json, ground)?)
}

/// Named relations from a generators or bindings file.
///
/// Accepted forms: a JSON array of relations, a JSON object mapping names to
/// relations, a family dump (`members` and `auxiliaries` lists of
/// `[name, relation]`), or one relation per line. Auxiliaries of a family dump
/// are skipped when `members_only` is set.
pub fn read_named_relations(path: &Path, members_only: bool) -> Result<Vec<(String, Relation)>> {
    let text = read_input(path)?;
    let values: Vec<(String, Value)> = match serde_json::from_str::<Value>(&text) {
        Ok(Value::Array(items)) => items.into_iter().enumerate().map(|(i, v)| (format!("g{i}"), v)).collect(),
        Ok(Value::Object(map)) if map.contains_key("members") => {
            let mut out = Vec::new();
            let keys: &[&str] = if members_only { &["members"] } else { &["members", "auxiliaries"] };
            for key in keys {
                if let Some(Value::Array(items)) = map.get(*key) {
                    for item in items {
                        let (name, rel): (String, Value) =
                            serde_json::from_value(item.clone()).context("family entries are [name, relation]")?;
                        out.push((name, rel));
                    }
                }
            }
            out
        }
        Ok(Value::Object(map)) if map.contains_key("pairs") => vec![("g0".to_string(), Value::Object(map))],
        Ok(Value::Object(map)) => map.into_iter().collect(),
        Ok(_) => bail!("{}: expected a JSON array or object", path.display()),
        Err(_) => text
            .lines()
            .filter(|l| !l.trim().is_empty())
            .enumerate()
            .map(|(i, l)| {
                serde_json::from_str(l)
                    .map(|v| (format!("g{i}"), v))
                    .with_context(|| format!("{}: line {} is not JSON", path.display(), i + 1))
            })
            .collect::<Result<_>>()?,
    };
    let mut ground: Option<Arc<GroundSet>> = None;
    let mut out = Vec::with_capacity(values.len());
    for (name, v) in values {
        let r = relation(v, ground.as_ref()).with_context(|| format!("relation `{name}`"))?;
        match &ground {
            Some(g) if !Arc::ptr_eq(g, r.ground()) => {
                return Err(anyhow!("relation `{name}` has a different ground set"));
            }
            None => ground = Some(r.ground().clone()),
            _ => {}
        }
        out.push((name, r));
    }
    if out.is_empty() {
        bail!("{}: no relations", path.display());
    }
    Ok(out)
}

pub fn print_json<T: serde::Serialize>(value: &T) -> Result<()> {
    let mut out = io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    Ok(())
}

pub fn print_text(text: &str) -> Result<()> {
    let mut out = io::stdout().lock();
    out.write_all(text.as_bytes())?;
    out.flush()?;
    Ok(())
}

pub fn describe_parse_error(e: &ParseError) -> String {
    format!("line {}, column {}: {}", e.line, e.col, e.message)
}
