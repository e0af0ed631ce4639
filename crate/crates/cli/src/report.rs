//! Report values and their two renderings.

use clap::ValueEnum;
use merlab_core::invariant::CoupledTuple;
use merlab_core::{BijectionFamily, FiniteStructure, Scale, Vocabulary};
use serde_json::{json, Map, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Text,
}

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// The fields every report starts with.
pub fn header(command: &str) -> Map<String, Value> {
    let mut m = Map::new();
    m.insert("tool".into(), json!("merlab"));
    m.insert("version".into(), json!(VERSION));
    m.insert("command".into(), json!(command));
    m
}

pub fn scale_json(vocab: &Vocabulary, scale: &Scale) -> Value {
    sizes_json(vocab, &scale.max)
}

pub fn sizes_json(vocab: &Vocabulary, sizes: &[usize]) -> Value {
    Value::Object(
        vocab
            .sorts()
            .iter()
            .zip(sizes)
            .map(|(s, &n)| (s.clone(), json!(n)))
            .collect(),
    )
}

pub fn structure_json(m: &FiniteStructure) -> Value {
    json!(m.to_string())
}

pub fn family_json(vocab: &Vocabulary, f: &BijectionFamily) -> Value {
    Value::Object(
        vocab
            .sorts()
            .iter()
            .zip(&f.0)
            .map(|(s, p)| (s.clone(), p.as_ref().map_or(Value::Null, |p| json!(p))))
            .collect(),
    )
}

pub fn tuple_text(vocab: &Vocabulary, t: &CoupledTuple) -> String {
    let parts: Vec<String> = t
        .sorts
        .iter()
        .zip(&t.values)
        .map(|(&s, v)| format!("{}:{v}", vocab.sort_name(s)))
        .collect();
    format!("({})", parts.join(", "))
}

pub fn render(report: &Value, format: Format) -> String {
    match format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(report).expect("serializable");
            s.push('\n');
            s
        }
        Format::Text => {
            let mut out = String::new();
            text(report, 0, &mut out);
            out
        }
    }
}

fn scalar(v: &Value) -> Option<String> {
    match v {
        Value::Null => Some("-".into()),
        Value::Bool(b) => Some(b.to_string()),
        Value::Number(n) => Some(n.to_string()),
        Value::String(s) => Some(s.clone()),
        Value::Array(a) if a.iter().all(|x| !x.is_object() && !x.is_array()) => {
            let parts: Vec<String> = a.iter().filter_map(scalar).collect();
            Some(format!("[{}]", parts.join(", ")))
        }
        Value::Array(a) if a.iter().all(|x| x.is_array()) && a.iter().all(|x| scalar(x).is_some()) => {
            let parts: Vec<String> = a.iter().filter_map(scalar).collect();
            Some(format!("[{}]", parts.join(", ")))
        }
        _ => None,
    }
}

fn text(v: &Value, indent: usize, out: &mut String) {
    let pad = "  ".repeat(indent);
    match v {
        Value::Object(m) => {
            for (k, x) in m {
                match scalar(x) {
                    Some(s) => out.push_str(&format!("{pad}{k}: {s}\n")),
                    None => {
                        out.push_str(&format!("{pad}{k}:\n"));
                        text(x, indent + 1, out);
                    }
                }
            }
        }
        Value::Array(a) => {
            for x in a {
                match scalar(x) {
                    Some(s) => out.push_str(&format!("{pad}- {s}\n")),
                    None => {
                        out.push_str(&format!("{pad}-\n"));
                        text(x, indent + 1, out);
                    }
                }
            }
        }
        other => out.push_str(&format!("{pad}{}\n", scalar(other).unwrap_or_default())),
    }
}
