//! Loading graph maps from JSON.
//!
//! The accepted document is
//!
//! ```json
//! {
//!   "vertices": ["v"],
//!   "edges": [{"name": "a", "src": "v", "dst": "v"}],
//!   "vertex_map": {"v": "v"},
//!   "edge_map": {"a": "ab"},
//!   "inverse_map": {"a": "aB"},
//!   "filtration": [["a"], ["b"]]
//! }
//! ```
//!
//! `inverse_map` and `filtration` are optional. Vertex ids may be strings or
//! integers. Every failure names the offending value by its JSON pointer.

use mtwall_core::graph::{positive, EdgePath, Graph, GraphMap};
use mtwall_core::strata::Filtration;
use serde_json::{Map, Value};
use std::fmt;
use std::path::Path;

/// A schema or consistency error located by a JSON pointer.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InputError {
    /// RFC 6901 pointer to the offending value; empty for the whole document.
    pub pointer: String,
    /// What is wrong there.
    pub message: String,
}

impl fmt::Display for InputError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let at = if self.pointer.is_empty() { "/" } else { &self.pointer };
        write!(f, "{at}: {}", self.message)
    }
}

impl std::error::Error for InputError {}

fn err<T>(pointer: impl Into<String>, message: impl Into<String>) -> Result<T, InputError> {
    Err(InputError {
        pointer: pointer.into(),
        message: message.into(),
    })
}

/// Escapes one reference token.
fn token(key: &str) -> String {
    key.replace('~', "~0").replace('/', "~1")
}

/// A loaded map together with the optional filtration it was given with.
#[derive(Clone, Debug)]
pub struct Loaded {
    /// The map, with its inverse attached when one was supplied.
    pub phi: GraphMap,
    /// The filtration named in the file, if any.
    pub filtration: Option<Filtration>,
}

/// Reads and validates a file.
pub fn load_path(path: &Path) -> Result<Loaded, InputError> {
    let text = std::fs::read_to_string(path).or_else(|e| err("", format!("cannot read {}: {e}", path.display())))?;
    load_str(&text)
}

/// Parses and validates a document.
pub fn load_str(text: &str) -> Result<Loaded, InputError> {
    let doc: Value = serde_json::from_str(text).or_else(|e| err("", format!("invalid JSON: {e}")))?;
    load_value(&doc)
}

fn vertex_id(v: &Value, ptr: &str) -> Result<String, InputError> {
    match v {
        Value::String(s) if !s.is_empty() => Ok(s.clone()),
        Value::Number(n) if n.is_u64() || n.is_i64() => Ok(n.to_string()),
        _ => err(ptr, "expected a vertex id (nonempty string or integer)"),
    }
}

fn object<'a>(doc: &'a Map<String, Value>, key: &str) -> Result<&'a Map<String, Value>, InputError> {
    match doc.get(key) {
        Some(Value::Object(m)) => Ok(m),
        Some(_) => err(format!("/{key}"), "expected an object"),
        None => err("", format!("missing required member {key:?}")),
    }
}

fn vertex_lookup(g: &Graph, id: &str, ptr: &str) -> Result<usize, InputError> {
    g.vertex(id).or_else(|_| err(ptr, format!("unknown vertex {id:?}")))
}

/// Validates a parsed document.
pub fn load_value(doc: &Value) -> Result<Loaded, InputError> {
    let doc = doc.as_object().map_or_else(|| err("", "expected an object"), Ok)?;
    const KNOWN: [&str; 6] = [
        "vertices",
        "edges",
        "vertex_map",
        "edge_map",
        "inverse_map",
        "filtration",
    ];
    if let Some(k) = doc.keys().find(|k| !KNOWN.contains(&k.as_str())) {
        return err(format!("/{}", token(k)), "unknown member");
    }

    let vertices = match doc.get("vertices") {
        Some(Value::Array(a)) if !a.is_empty() => a,
        Some(_) => return err("/vertices", "expected a nonempty array"),
        None => return err("", "missing required member \"vertices\""),
    };
    let mut vnames = Vec::with_capacity(vertices.len());
    for (i, v) in vertices.iter().enumerate() {
        let id = vertex_id(v, &format!("/vertices/{i}"))?;
        if vnames.contains(&id) {
            return err(format!("/vertices/{i}"), format!("duplicate vertex {id:?}"));
        }
        vnames.push(id);
    }

    let edges = match doc.get("edges") {
        Some(Value::Array(a)) if !a.is_empty() => a,
        Some(_) => return err("/edges", "expected a nonempty array"),
        None => return err("", "missing required member \"edges\""),
    };
    let mut triples = Vec::with_capacity(edges.len());
    for (i, e) in edges.iter().enumerate() {
        let ptr = format!("/edges/{i}");
        let obj = e.as_object().map_or_else(|| err(&ptr, "expected an object"), Ok)?;
        let name = match obj.get("name") {
            Some(Value::String(s)) => s.clone(),
            Some(_) => return err(format!("{ptr}/name"), "expected a string"),
            None => return err(&ptr, "missing required member \"name\""),
        };
        let valid = name.chars().next().is_some_and(|c| c.is_ascii_lowercase())
            && name.chars().skip(1).all(|c| c.is_ascii_digit());
        if !valid {
            return err(
                format!("{ptr}/name"),
                "edge names are a lowercase letter followed by digits",
            );
        }
        if triples.iter().any(|(n, _, _): &(String, String, String)| *n == name) {
            return err(format!("{ptr}/name"), format!("duplicate edge {name:?}"));
        }
        let mut ends = Vec::with_capacity(2);
        for key in ["src", "dst"] {
            let p = format!("{ptr}/{key}");
            let id = vertex_id(obj.get(key).unwrap_or(&Value::Null), &p)?;
            if !vnames.contains(&id) {
                return err(p, format!("unknown vertex {id:?}"));
            }
            ends.push(id);
        }
        let dst = ends.pop().unwrap_or_default();
        let src = ends.pop().unwrap_or_default();
        triples.push((name, src, dst));
    }
    let g = Graph::new(vnames, triples).or_else(|e| err("/edges", e.to_string()))?;

    let vmap_obj = object(doc, "vertex_map")?;
    let vertex_map = read_vertex_map(&g, vmap_obj, "/vertex_map")?;
    let emap_obj = object(doc, "edge_map")?;
    let images = read_edge_map(&g, emap_obj, "/edge_map", &vertex_map)?;
    let mut phi = GraphMap::new(g, vertex_map.clone(), images).or_else(|e| err("/edge_map", e.to_string()))?;

    if let Some(inv) = doc.get("inverse_map") {
        let inv = inv
            .as_object()
            .map_or_else(|| err("/inverse_map", "expected an object"), Ok)?;
        let g = phi.graph();
        let mut inverse_vertices = vec![usize::MAX; g.vertex_count()];
        for (v, &w) in vertex_map.iter().enumerate() {
            if inverse_vertices[w] != usize::MAX {
                return err("/vertex_map", "vertex map is not a bijection, so no inverse exists");
            }
            inverse_vertices[w] = v;
        }
        let images = read_edge_map(g, inv, "/inverse_map", &inverse_vertices)?;
        phi = phi
            .with_inverse(inverse_vertices, images)
            .or_else(|e| err("/inverse_map", e.to_string()))?;
    }

    let filtration = match doc.get("filtration") {
        None => None,
        Some(Value::Array(levels)) => {
            let mut names = Vec::with_capacity(levels.len());
            for (i, level) in levels.iter().enumerate() {
                let ptr = format!("/filtration/{i}");
                let arr = level
                    .as_array()
                    .map_or_else(|| err(&ptr, "expected an array of edge names"), Ok)?;
                let mut row = Vec::with_capacity(arr.len());
                for (j, n) in arr.iter().enumerate() {
                    let name = n
                        .as_str()
                        .map_or_else(|| err(format!("{ptr}/{j}"), "expected an edge name"), Ok)?;
                    if phi.graph().dir(name).map_or(true, |d| d % 2 == 1) {
                        return err(format!("{ptr}/{j}"), format!("unknown edge {name:?}"));
                    }
                    row.push(name.to_string());
                }
                names.push(row);
            }
            let f = Filtration::from_names(phi.graph(), &names).or_else(|e| err("/filtration", e.to_string()))?;
            if let Some((k, _)) = f.invariance_failure(&phi) {
                return err(
                    "/filtration",
                    format!(
                        "not φ-invariant: the image of {} leaves its level",
                        phi.graph().name(2 * k)
                    ),
                );
            }
            Some(f)
        }
        Some(_) => return err("/filtration", "expected an array of arrays"),
    };
    Ok(Loaded { phi, filtration })
}

fn read_vertex_map(g: &Graph, obj: &Map<String, Value>, base: &str) -> Result<Vec<usize>, InputError> {
    let mut out = vec![usize::MAX; g.vertex_count()];
    for (k, v) in obj {
        let ptr = format!("{base}/{}", token(k));
        let from = vertex_lookup(g, k, &ptr)?;
        let to = vertex_id(v, &ptr)?;
        out[from] = vertex_lookup(g, &to, &ptr)?;
    }
    if let Some(i) = out.iter().position(|&v| v == usize::MAX) {
        return err(base, format!("no image for vertex {:?}", g.vertex_names()[i]));
    }
    Ok(out)
}

fn read_edge_map(
    g: &Graph,
    obj: &Map<String, Value>,
    base: &str,
    vertex_map: &[usize],
) -> Result<Vec<Vec<usize>>, InputError> {
    let mut out: Vec<Option<Vec<usize>>> = vec![None; g.edge_count()];
    for (k, v) in obj {
        let ptr = format!("{base}/{}", token(k));
        let e = match g.dir(k) {
            Ok(d) if d % 2 == 0 => d,
            _ => return err(&ptr, format!("unknown edge {k:?}")),
        };
        let word = v.as_str().map_or_else(|| err(&ptr, "expected a word"), Ok)?;
        let dirs = g.parse_word(word).or_else(|e| err(&ptr, e.to_string()))?;
        if dirs.is_empty() {
            return err(&ptr, "edge images must be nonempty");
        }
        let path = EdgePath::new(g, vertex_map[g.src(e)], dirs.clone()).or_else(|_| {
            err(
                &ptr,
                format!("{word:?} is not a path starting at the image of {k}'s source"),
            )
        })?;
        if path.end() != vertex_map[g.dst(e)] {
            return err(&ptr, format!("{word:?} does not end at the image of {k}'s target"));
        }
        out[positive(e)] = Some(dirs);
    }
    out.into_iter()
        .enumerate()
        .map(|(k, img)| img.map_or_else(|| err(base, format!("no image for edge {:?}", g.name(2 * k))), Ok))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    const EX2: &str = include_str!("../data/ex2.json");

    #[test]
    fn loads_examples() {
        let l = load_str(EX2).unwrap();
        assert!(l.phi.has_inverse());
        assert_eq!(l.phi.graph().edge_count(), 2);
        let theta = load_str(include_str!("../data/theta.json")).unwrap();
        assert_eq!(theta.phi.graph().vertex_count(), 2);
    }

    #[test]
    fn pointers() {
        let bad = EX2.replace("\"ab\"", "\"aq\"");
        assert_eq!(load_str(&bad).unwrap_err().pointer, "/edge_map/b");
        let bad = EX2.replace("\"bA\"", "\"bb\"");
        assert_eq!(load_str(&bad).unwrap_err().pointer, "/inverse_map");
        let bad = EX2.replace("\"dst\": \"v\"}]", "\"dst\": \"w\"}]");
        assert_eq!(load_str(&bad).unwrap_err().pointer, "/edges/1/dst");
        let e = load_str(r#"{"vertices":[],"edges":[]}"#).unwrap_err();
        assert_eq!(e.pointer, "/vertices");
    }
}
