//! Rewrites cone labels in JSON output from "1,3" to "AC".

use serde_json::Value;

use tailcone::ConeId;

fn relabel_str(s: &str, d: usize) -> Option<String> {
    ConeId::parse(s, d).ok().map(ConeId::letters)
}

/// Relabels keys of `masses` and `counts` objects whose keys are all cone
/// labels, and values of `cone` fields, at any depth.
pub fn to_letters(v: &mut Value, d: usize) {
    match v {
        Value::Object(map) => {
            for (key, child) in map.iter_mut() {
                match (key.as_str(), &mut *child) {
                    ("cone", Value::String(s)) => {
                        if let Some(l) = relabel_str(s, d) {
                            *s = l;
                        }
                    }
                    ("masses" | "counts" | "detection_counts", Value::Object(inner))
                        if inner.keys().all(|k| relabel_str(k, d).is_some()) =>
                    {
                        let old = std::mem::take(inner);
                        for (k, val) in old {
                            inner.insert(relabel_str(&k, d).unwrap_or(k), val);
                        }
                    }
                    _ => to_letters(child, d),
                }
            }
        }
        Value::Array(items) => items.iter_mut().for_each(|x| to_letters(x, d)),
        _ => {}
    }
}
