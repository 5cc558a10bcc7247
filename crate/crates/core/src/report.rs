//! Deterministic JSON/CSV emission: fixed field order and every float as
//! `%.12e`.

use std::fmt::Write;

use serde::Serialize;
use serde_json::Value;

use crate::dstability::RegionVerification;
use crate::sim::Trajectory;

pub fn fmt_float(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.12e}")
    } else if x.is_nan() {
        "NaN".to_string()
    } else if x > 0.0 {
        "inf".to_string()
    } else {
        "-inf".to_string()
    }
}

/// Pretty JSON with floats as `%.12e`; non-finite floats become `null`.
pub fn to_json<S: Serialize>(v: &S) -> String {
    render(v, &|n| {
        if n.is_f64() {
            fmt_float(n.as_f64().unwrap_or(f64::NAN))
        } else {
            n.to_string()
        }
    })
}

/// Pretty JSON keeping serde_json's shortest round-trip float notation.
pub fn to_json_plain<S: Serialize>(v: &S) -> String {
    render(v, &|n| n.to_string())
}

fn render<S: Serialize>(v: &S, num: &dyn Fn(&serde_json::Number) -> String) -> String {
    let value = serde_json::to_value(v).expect("report serializes");
    let mut out = String::new();
    write_value(&mut out, &value, 0, num);
    out.push('\n');
    out
}

fn write_value(out: &mut String, v: &Value, depth: usize, num: &dyn Fn(&serde_json::Number) -> String) {
    let pad = |d: usize| "  ".repeat(d);
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => out.push_str(&num(n)),
        Value::String(s) => out.push_str(&serde_json::to_string(s).expect("string")),
        Value::Array(items) => {
            if items.is_empty() {
                out.push_str("[]");
                return;
            }
            // short numeric arrays (complex numbers, edges) stay on one line
            if items.len() <= 3 && items.iter().all(Value::is_number) {
                out.push('[');
                for (i, it) in items.iter().enumerate() {
                    if i > 0 {
                        out.push_str(", ");
                    }
                    write_value(out, it, depth, num);
                }
                out.push(']');
                return;
            }
            out.push_str("[\n");
            for (i, it) in items.iter().enumerate() {
                out.push_str(&pad(depth + 1));
                write_value(out, it, depth + 1, num);
                out.push_str(if i + 1 < items.len() { ",\n" } else { "\n" });
            }
            out.push_str(&pad(depth));
            out.push(']');
        }
        Value::Object(map) => {
            if map.is_empty() {
                out.push_str("{}");
                return;
            }
            out.push_str("{\n");
            for (i, (k, val)) in map.iter().enumerate() {
                out.push_str(&pad(depth + 1));
                out.push_str(&serde_json::to_string(k).expect("key"));
                out.push_str(": ");
                write_value(out, val, depth + 1, num);
                out.push_str(if i + 1 < map.len() { ",\n" } else { "\n" });
            }
            out.push_str(&pad(depth));
            out.push('}');
        }
    }
}

/// `re,im,margin` plus one `margin_<k>` column per region part.
pub fn poles_csv(v: &RegionVerification<f64>) -> String {
    let parts = v.poles.first().map_or(0, |p| p.part_margins.len());
    let mut out = String::from("re,im,margin");
    for k in 1..=parts {
        let _ = write!(out, ",margin_{k}");
    }
    out.push('\n');
    for p in &v.poles {
        let _ = write!(out, "{},{},{}", fmt_float(p.pole.re), fmt_float(p.pole.im), fmt_float(p.margin));
        for m in &p.part_margins {
            let _ = write!(out, ",{}", fmt_float(*m));
        }
        out.push('\n');
    }
    out
}

/// `t,du_1,...,du_N` with 1-based node numbers.
pub fn trajectory_csv(tr: &Trajectory<f64>) -> String {
    let mut out = String::from("t");
    for k in 1..=tr.du.len() {
        let _ = write!(out, ",du_{k}");
    }
    out.push('\n');
    for (i, t) in tr.t.iter().enumerate() {
        out.push_str(&fmt_float(*t));
        for s in &tr.du {
            out.push(',');
            out.push_str(&fmt_float(s[i]));
        }
        out.push('\n');
    }
    out
}
