//! Output formats. Every report is built as JSON; the other formats are
//! views of it.

use clap::ValueEnum;
use serde_json::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Human,
}

/// Writes `value` to stdout. `csv` overrides the generic CSV view when the
/// command has a natural table.
pub fn emit(format: Format, value: &Value, csv: Option<&str>) {
    let text = match format {
        Format::Json => serde_json::to_string_pretty(value).expect("JSON value") + "\n",
        Format::Csv => csv.map_or_else(|| generic_csv(value), str::to_owned),
        Format::Human => {
            let mut s = String::new();
            human(value, 0, &mut s);
            s
        }
    };
    print!("{text}");
}

fn scalar(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Null => "-".into(),
        other => other.to_string(),
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_owned()
    }
}

/// `key,value` per top-level field; nested values are JSON-encoded.
fn generic_csv(value: &Value) -> String {
    let mut s = String::from("key,value\n");
    match value {
        Value::Object(map) => {
            for (k, v) in map {
                s.push_str(&format!("{},{}\n", csv_field(k), csv_field(&scalar(v))));
            }
        }
        other => s.push_str(&format!("value,{}\n", csv_field(&scalar(other)))),
    }
    s
}

fn is_flat(v: &Value) -> bool {
    match v {
        Value::Array(a) => a.iter().all(|x| !x.is_object() && !x.is_array()),
        Value::Object(_) => false,
        _ => true,
    }
}

fn flat(v: &Value) -> String {
    match v {
        Value::Array(a) => format!("[{}]", a.iter().map(scalar).collect::<Vec<_>>().join(", ")),
        other => scalar(other),
    }
}

fn human(v: &Value, indent: usize, out: &mut String) {
    let pad = "  ".repeat(indent);
    match v {
        Value::Object(map) => {
            for (k, x) in map {
                if is_flat(x) {
                    out.push_str(&format!("{pad}{k}: {}\n", flat(x)));
                } else {
                    out.push_str(&format!("{pad}{k}:\n"));
                    human(x, indent + 1, out);
                }
            }
        }
        Value::Array(items) => {
            for (i, x) in items.iter().enumerate() {
                if is_flat(x) {
                    out.push_str(&format!("{pad}- {}\n", flat(x)));
                } else {
                    out.push_str(&format!("{pad}[{i}]\n"));
                    human(x, indent + 1, out);
                }
            }
        }
        other => out.push_str(&format!("{pad}{}\n", scalar(other))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn csv_quotes_fields() {
        let v = json!({ "a": "x,y", "b": 3 });
        assert_eq!(generic_csv(&v), "key,value\na,\"x,y\"\nb,3\n");
    }

    #[test]
    fn human_nests() {
        let mut s = String::new();
        human(&json!({ "k": [1, 2], "o": { "x": null } }), 0, &mut s);
        assert_eq!(s, "k: [1, 2]\no:\n  x: -\n");
    }
}
