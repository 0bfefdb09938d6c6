//! JSON network documents.
//!
//! ```json
//! {
//!   "name": "rotation",
//!   "n": 2, "m": 0, "d": 0, "t": 0, "p": 0, "s": 2,
//!   "signal_order": ["u", "x", "d", "f"],
//!   "L": {"rows": 4, "cols": [2, 4, 1, 3]},
//!   "rules": null,
//!   "H": null
//! }
//! ```
//!
//! `L` or `rules` (or both, if they agree) must be present. Only `n` is
//! required among the dimensions.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use super::{compile_algebraic_form, BooleanControlNetwork, Dims, SignalOrder, UpdateRuleSet};
use crate::error::{Error, Result};
use crate::stp::{log2_exact, LogicalMatrix};

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Document {
    #[serde(default)]
    name: String,
    n: usize,
    #[serde(default)]
    m: usize,
    #[serde(default)]
    d: usize,
    #[serde(default)]
    t: usize,
    #[serde(default)]
    p: Option<usize>,
    #[serde(default)]
    s: Option<usize>,
    #[serde(default = "default_order")]
    signal_order: Vec<String>,
    #[serde(rename = "L", default)]
    l: Option<LogicalMatrix>,
    #[serde(default)]
    rules: Option<UpdateRuleSet>,
    #[serde(rename = "H", default)]
    h: Option<LogicalMatrix>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    permutation: Option<Vec<usize>>,
}

fn default_order() -> Vec<String> {
    ["u", "x", "d", "f"].map(String::from).to_vec()
}

pub fn parse_network_file(text: &str) -> Result<BooleanControlNetwork> {
    let doc: Document = serde_json::from_str(text).map_err(|e| Error::Schema(e.to_string()))?;
    let order = SignalOrder::from_labels(&doc.signal_order)?;
    for (what, m) in [("L", &doc.l), ("H", &doc.h)] {
        if let Some(m) = m {
            if log2_exact(m.rows()).is_none() {
                return Err(Error::Schema(format!("{what} rows = {} must be a power of 2", m.rows())));
            }
        }
    }
    let p = match (doc.p, &doc.h) {
        (Some(p), _) => p,
        (None, Some(h)) => log2_exact(h.rows()).unwrap_or(0),
        (None, None) => doc.rules.as_ref().map_or(0, |r| r.output.len()),
    };
    let dims = Dims { n: doc.n, m: doc.m, d: doc.d, t: doc.t, p, s: doc.s.unwrap_or(0) };

    let mut net = match (&doc.rules, doc.l) {
        (None, None) => return Err(Error::Schema("either L or rules must be given".into())),
        (Some(rules), l) => {
            let compiled = compile_algebraic_form(rules, dims, order)?;
            if let Some(l) = l {
                if &l != compiled.l() {
                    return Err(Error::ConflictingDefinition("L differs from the compiled rules".into()));
                }
            }
            match (&doc.h, compiled.h()) {
                (Some(h), Some(ch)) if h != ch => {
                    return Err(Error::ConflictingDefinition("H differs from the compiled output rules".into()))
                }
                (Some(h), None) => compiled.with_output(h.clone())?,
                _ => compiled,
            }
        }
        (None, Some(l)) => {
            let dims = Dims { s: doc.s.unwrap_or(doc.n), ..dims };
            let mut net = BooleanControlNetwork::new(dims, order, l, doc.h)?;
            net.set_permutation(doc.permutation);
            net
        }
    };
    net = net.with_name(doc.name);
    Ok(net)
}

pub fn read_network_file(path: impl AsRef<Path>) -> Result<BooleanControlNetwork> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::Schema(format!("{}: {e}", path.display())))?;
    parse_network_file(&text)
}

/// Canonical document: fixed key order, two-space indent, scalar arrays on
/// one line, trailing newline.
pub fn write_network_file(net: &BooleanControlNetwork) -> String {
    let dims = net.dims();
    let doc = Document {
        name: net.name().to_string(),
        n: dims.n,
        m: dims.m,
        d: dims.d,
        t: dims.t,
        p: Some(dims.p),
        s: Some(dims.s),
        signal_order: net.order().labels().map(String::from).to_vec(),
        l: Some(net.l().clone()),
        rules: net.rules().cloned(),
        h: net.h().cloned(),
        permutation: net.permutation().map(<[usize]>::to_vec),
    };
    let value = serde_json::to_value(&doc).expect("documents serialize");
    let mut out = String::new();
    render(&value, 0, &mut out);
    out.push('\n');
    out
}

/// Short content hash of the canonical document.
pub fn fingerprint(net: &BooleanControlNetwork) -> String {
    let digest = Sha256::digest(write_network_file(net).as_bytes());
    digest[..8].iter().fold(String::new(), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

fn is_scalar(v: &Value) -> bool {
    !matches!(v, Value::Array(_) | Value::Object(_))
}

fn render(v: &Value, indent: usize, out: &mut String) {
    let pad = "  ".repeat(indent + 1);
    match v {
        Value::Object(map) if !map.is_empty() => {
            out.push_str("{\n");
            for (i, (k, val)) in map.iter().enumerate() {
                out.push_str(&pad);
                out.push_str(&Value::String(k.clone()).to_string());
                out.push_str(": ");
                render(val, indent + 1, out);
                if i + 1 < map.len() {
                    out.push(',');
                }
                out.push('\n');
            }
            out.push_str(&"  ".repeat(indent));
            out.push('}');
        }
        Value::Array(items) if !items.iter().all(is_scalar) => {
            out.push_str("[\n");
            for (i, item) in items.iter().enumerate() {
                out.push_str(&pad);
                render(item, indent + 1, out);
                if i + 1 < items.len() {
                    out.push(',');
                }
                out.push('\n');
            }
            out.push_str(&"  ".repeat(indent));
            out.push(']');
        }
        Value::Array(items) => {
            let parts: Vec<String> = items.iter().map(Value::to_string).collect();
            out.push('[');
            out.push_str(&parts.join(", "));
            out.push(']');
        }
        other => out.push_str(&other.to_string()),
    }
}
