//! JSON instance and solution files.
//!
//! Instance file:
//!
//! ```json
//! { "num_packets": 2, "packet_bits": 2,
//!   "users": [
//!     { "requests": [0],
//!       "side_info": { "kind": "xor", "terms": [{ "packets": [0, 1], "bit": 0 }] } } ] }
//! ```
//!
//! `side_info.kind` is one of `rows` (raw 0/1 rows of width `N·F`),
//! `uncoded` (`packets`: whole packets) or `xor` (`terms`: packet XORs, each
//! optionally restricted to one `bit`). Serialization always writes the
//! `rows` form with sorted keys.
//!
//! Errors carry the JSON path of the offending value, e.g.
//! `users[1].side_info.rows[0]`.

use std::fmt::Write as _;

use minrank_core::{
    side_info_uncoded, side_info_xor, Gf2Matrix, IndexCodeSolution, InstanceError, Method,
    ProblemInstance, UserDecoder, XorTerm,
};
use serde_json::{json, Map, Value};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{path}: {message}")]
pub struct FormatError {
    pub path: String,
    pub message: String,
}

impl FormatError {
    fn new(path: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            path: path.into(),
            message: message.into(),
        }
    }
}

type Result<T> = std::result::Result<T, FormatError>;

fn parse_json(text: &[u8]) -> Result<Value> {
    let text = std::str::from_utf8(text).map_err(|e| FormatError::new("$", e.to_string()))?;
    serde_json::from_str(text).map_err(|e| FormatError::new("$", e.to_string()))
}

fn object<'a>(v: &'a Value, path: &str, allowed: &[&str]) -> Result<&'a Map<String, Value>> {
    let map = v
        .as_object()
        .ok_or_else(|| FormatError::new(path, "expected an object"))?;
    if let Some(k) = map.keys().find(|k| !allowed.contains(&k.as_str())) {
        return Err(FormatError::new(format!("{path}.{k}"), "unknown field"));
    }
    Ok(map)
}

fn field<'a>(map: &'a Map<String, Value>, path: &str, key: &str) -> Result<&'a Value> {
    map.get(key)
        .ok_or_else(|| FormatError::new(format!("{path}.{key}"), "missing field"))
}

fn array<'a>(v: &'a Value, path: &str) -> Result<&'a [Value]> {
    v.as_array()
        .map(Vec::as_slice)
        .ok_or_else(|| FormatError::new(path, "expected an array"))
}

fn count(v: &Value, path: &str) -> Result<usize> {
    v.as_u64()
        .and_then(|n| usize::try_from(n).ok())
        .ok_or_else(|| FormatError::new(path, "expected a non-negative integer"))
}

fn indices(v: &Value, path: &str) -> Result<Vec<usize>> {
    array(v, path)?
        .iter()
        .enumerate()
        .map(|(i, x)| count(x, &format!("{path}[{i}]")))
        .collect()
}

/// Reads a matrix of 0/1 rows with the given width.
fn bit_rows(v: &Value, path: &str, cols: usize) -> Result<Gf2Matrix> {
    let rows = array(v, path)?;
    let mut parsed = Vec::with_capacity(rows.len());
    for (r, row) in rows.iter().enumerate() {
        let rpath = format!("{path}[{r}]");
        let entries = array(row, &rpath)?;
        if entries.len() != cols {
            return Err(FormatError::new(
                rpath,
                format!("row has {} entries, expected {cols}", entries.len()),
            ));
        }
        let bits = entries
            .iter()
            .enumerate()
            .map(|(c, b)| match b.as_u64() {
                Some(0) => Ok(0u8),
                Some(1) => Ok(1u8),
                _ => Err(FormatError::new(format!("{rpath}[{c}]"), "expected 0 or 1")),
            })
            .collect::<Result<Vec<u8>>>()?;
        parsed.push(bits);
    }
    Ok(Gf2Matrix::from_rows(cols, &parsed).expect("rows checked above"))
}

fn matrix_with_shape(v: &Value, path: &str, shape: (usize, usize)) -> Result<Gf2Matrix> {
    let m = bit_rows(v, path, shape.1)?;
    if m.rows() != shape.0 {
        return Err(FormatError::new(
            path,
            format!("expected {} rows, found {}", shape.0, m.rows()),
        ));
    }
    Ok(m)
}

fn builder_error(path: &str, list: &str, e: InstanceError) -> FormatError {
    match e {
        InstanceError::PacketOutOfRange { position, .. } => {
            FormatError::new(format!("{path}.{list}[{position}]"), e.to_string())
        }
        InstanceError::EmptyTerm { term } | InstanceError::BitOutOfRange { term, .. } => {
            FormatError::new(format!("{path}.terms[{term}]"), e.to_string())
        }
        _ => FormatError::new(format!("{path}.{list}"), e.to_string()),
    }
}

fn side_info(v: &Value, path: &str, n: usize, f: usize) -> Result<Gf2Matrix> {
    let kind = v
        .get("kind")
        .and_then(Value::as_str)
        .ok_or_else(|| FormatError::new(format!("{path}.kind"), "expected a string"))?;
    match kind {
        "rows" => {
            let map = object(v, path, &["kind", "rows"])?;
            bit_rows(field(map, path, "rows")?, &format!("{path}.rows"), n * f)
        }
        "uncoded" => {
            let map = object(v, path, &["kind", "packets"])?;
            let packets = indices(field(map, path, "packets")?, &format!("{path}.packets"))?;
            side_info_uncoded(n, f, &packets).map_err(|e| builder_error(path, "packets", e))
        }
        "xor" => {
            let map = object(v, path, &["kind", "terms"])?;
            let terms_path = format!("{path}.terms");
            let terms = array(field(map, path, "terms")?, &terms_path)?
                .iter()
                .enumerate()
                .map(|(t, term)| {
                    let tpath = format!("{terms_path}[{t}]");
                    let tmap = object(term, &tpath, &["packets", "bit"])?;
                    let packets = indices(field(tmap, &tpath, "packets")?, &format!("{tpath}.packets"))?;
                    let bit = tmap
                        .get("bit")
                        .filter(|b| !b.is_null())
                        .map(|b| count(b, &format!("{tpath}.bit")))
                        .transpose()?;
                    Ok(XorTerm { packets, bit })
                })
                .collect::<Result<Vec<_>>>()?;
            side_info_xor(n, f, &terms).map_err(|e| match e {
                InstanceError::PacketOutOfRange { .. } | InstanceError::DuplicatePacket { .. } => {
                    // Locate the term holding the bad index.
                    let t = terms
                        .iter()
                        .position(|t| side_info_xor(n, f, std::slice::from_ref(t)).is_err())
                        .unwrap_or(0);
                    builder_error(&format!("{terms_path}[{t}]"), "packets", e)
                }
                other => builder_error(path, "terms", other),
            })
        }
        other => Err(FormatError::new(
            format!("{path}.kind"),
            format!("unknown side-information kind {other:?}"),
        )),
    }
}

fn instance_error(e: InstanceError) -> FormatError {
    use InstanceError::*;
    let path = match &e {
        NoPackets => "$.num_packets".to_string(),
        NoPacketBits => "$.packet_bits".to_string(),
        NoUsers => "$.users".to_string(),
        EmptyRequests { user } | DuplicateRequest { user, .. } => {
            format!("users[{user}].requests")
        }
        RequestOutOfRange { user, position, .. } => format!("users[{user}].requests[{position}]"),
        SideInfoWidth { user, .. } => format!("users[{user}].side_info"),
        _ => "$".to_string(),
    };
    FormatError::new(path, e.to_string())
}

pub fn parse_instance(text: &[u8]) -> Result<ProblemInstance> {
    let root = parse_json(text)?;
    let map = object(&root, "$", &["num_packets", "packet_bits", "users"])?;
    let n = count(field(map, "$", "num_packets")?, "$.num_packets")?;
    let f = count(field(map, "$", "packet_bits")?, "$.packet_bits")?;
    if n == 0 || f == 0 {
        return Err(instance_error(if n == 0 {
            InstanceError::NoPackets
        } else {
            InstanceError::NoPacketBits
        }));
    }
    let users = array(field(map, "$", "users")?, "$.users")?
        .iter()
        .enumerate()
        .map(|(k, u)| {
            let path = format!("users[{k}]");
            let umap = object(u, &path, &["requests", "side_info"])?;
            let requests = indices(field(umap, &path, "requests")?, &format!("{path}.requests"))?;
            let s = side_info(field(umap, &path, "side_info")?, &format!("{path}.side_info"), n, f)?;
            Ok(minrank_core::UserSpec::new(requests, s))
        })
        .collect::<Result<Vec<_>>>()?;
    ProblemInstance::new(n, f, users).map_err(instance_error)
}

fn matrix_value(m: &Gf2Matrix) -> Value {
    Value::Array(
        m.to_rows()
            .into_iter()
            .map(|r| Value::Array(r.into_iter().map(Value::from).collect()))
            .collect(),
    )
}

pub fn instance_value(instance: &ProblemInstance) -> Value {
    let users: Vec<Value> = instance
        .users()
        .iter()
        .map(|u| {
            json!({
                "requests": u.requests(),
                "side_info": { "kind": "rows", "rows": matrix_value(u.side_info()) },
            })
        })
        .collect();
    json!({
        "num_packets": instance.num_packets(),
        "packet_bits": instance.packet_bits(),
        "users": users,
    })
}

/// Canonical form: sorted keys, raw rows, trailing newline.
pub fn serialize_instance(instance: &ProblemInstance) -> String {
    to_canonical_string(&instance_value(instance))
}

/// Metadata stored next to a solution.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolutionMeta {
    pub method: Method,
    pub seed: u64,
    pub optimal_certified: bool,
}

pub fn serialize_solution(sol: &IndexCodeSolution, meta: &SolutionMeta) -> String {
    let a: Vec<Value> = sol.decoders().iter().map(|d| matrix_value(&d.a_t)).collect();
    let b: Vec<Value> = sol.decoders().iter().map(|d| matrix_value(&d.b_t)).collect();
    let v = json!({
        "beta": sol.beta(),
        "c_ic": matrix_value(sol.c_ic()),
        "chosen_rows": sol.chosen_rows(),
        "a_mats": a,
        "b_mats": b,
        "seed": meta.seed,
        "method": meta.method.as_str(),
        "optimal_certified": meta.optimal_certified,
    });
    to_canonical_string(&v)
}

/// Parses a solution file, checking every matrix against the instance's shapes.
pub fn parse_solution(
    text: &[u8],
    instance: &ProblemInstance,
) -> Result<(IndexCodeSolution, SolutionMeta)> {
    let root = parse_json(text)?;
    let map = object(
        &root,
        "$",
        &[
            "beta",
            "c_ic",
            "chosen_rows",
            "a_mats",
            "b_mats",
            "seed",
            "method",
            "optimal_certified",
        ],
    )?;
    let beta = count(field(map, "$", "beta")?, "$.beta")?;
    let c_ic = matrix_with_shape(field(map, "$", "c_ic")?, "$.c_ic", (beta, instance.total_bits()))?;
    let chosen_rows = indices(field(map, "$", "chosen_rows")?, "$.chosen_rows")?;
    let a_list = array(field(map, "$", "a_mats")?, "$.a_mats")?;
    let b_list = array(field(map, "$", "b_mats")?, "$.b_mats")?;
    for (name, list) in [("a_mats", a_list), ("b_mats", b_list)] {
        if list.len() != instance.num_users() {
            return Err(FormatError::new(
                format!("$.{name}"),
                format!("expected {} matrices, found {}", instance.num_users(), list.len()),
            ));
        }
    }
    let decoders = (0..instance.num_users())
        .map(|k| {
            let rows = instance.request_rows(k);
            Ok(UserDecoder {
                a_t: matrix_with_shape(
                    &a_list[k],
                    &format!("$.a_mats[{k}]"),
                    (rows, instance.user(k).cache_bits()),
                )?,
                b_t: matrix_with_shape(&b_list[k], &format!("$.b_mats[{k}]"), (rows, beta))?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let seed = field(map, "$", "seed")?
        .as_u64()
        .ok_or_else(|| FormatError::new("$.seed", "expected a non-negative integer"))?;
    let method = match field(map, "$", "method")?.as_str() {
        Some("exhaustive") => Method::Exhaustive,
        Some("greedy") => Method::Greedy,
        _ => {
            return Err(FormatError::new(
                "$.method",
                "expected \"exhaustive\" or \"greedy\"",
            ))
        }
    };
    let optimal_certified = field(map, "$", "optimal_certified")?
        .as_bool()
        .ok_or_else(|| FormatError::new("$.optimal_certified", "expected a boolean"))?;
    Ok((
        IndexCodeSolution::from_parts(c_ic, chosen_rows, decoders),
        SolutionMeta {
            method,
            seed,
            optimal_certified,
        },
    ))
}

/// Pretty JSON with sorted keys where arrays of scalars stay on one line.
pub fn to_canonical_string(v: &Value) -> String {
    let mut out = String::new();
    write_value(&mut out, v, 0);
    out.push('\n');
    out
}

fn write_value(out: &mut String, v: &Value, indent: usize) {
    let pad = |out: &mut String, n: usize| out.extend(std::iter::repeat_n(' ', n * 2));
    match v {
        Value::Array(items) if items.iter().all(|x| !x.is_array() && !x.is_object()) => {
            out.push_str(&serde_json::to_string(v).expect("scalars serialize"));
        }
        Value::Array(items) => {
            if items.is_empty() {
                out.push_str("[]");
                return;
            }
            out.push_str("[\n");
            for (i, item) in items.iter().enumerate() {
                pad(out, indent + 1);
                write_value(out, item, indent + 1);
                out.push_str(if i + 1 < items.len() { ",\n" } else { "\n" });
            }
            pad(out, indent);
            out.push(']');
        }
        Value::Object(map) => {
            if map.is_empty() {
                out.push_str("{}");
                return;
            }
            let mut keys: Vec<&String> = map.keys().collect();
            keys.sort();
            out.push_str("{\n");
            for (i, k) in keys.iter().enumerate() {
                pad(out, indent + 1);
                let _ = write!(out, "{}: ", Value::String((*k).clone()));
                write_value(out, &map[*k], indent + 1);
                out.push_str(if i + 1 < keys.len() { ",\n" } else { "\n" });
            }
            pad(out, indent);
            out.push('}');
        }
        scalar => out.push_str(&serde_json::to_string(scalar).expect("scalars serialize")),
    }
}
