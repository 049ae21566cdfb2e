//! Graph JSON: `{"n", "edges", "features"?, "labels"?, "graph_label"?, "targets"?}`,
//! one object per file or an array of them.

use std::path::Path;

use nalgebra::DMatrix;
use serde_json::{json, Map, Value};

use super::Dataset;
use crate::error::{Error, Result};
use crate::graph::Graph;

fn err(path: &str, message: impl Into<String>) -> Error {
    Error::Json {
        path: path.to_string(),
        message: message.into(),
    }
}

fn as_index(v: &Value, path: &str) -> Result<usize> {
    v.as_u64()
        .map(|x| x as usize)
        .ok_or_else(|| err(path, format!("expected a non-negative integer, found {v}")))
}

fn as_array<'a>(v: &'a Value, path: &str) -> Result<&'a Vec<Value>> {
    v.as_array().ok_or_else(|| err(path, format!("expected an array, found {v}")))
}

fn as_reals(v: &Value, path: &str) -> Result<Vec<f64>> {
    as_array(v, path)?
        .iter()
        .enumerate()
        .map(|(i, x)| {
            x.as_f64()
                .ok_or_else(|| err(&format!("{path}[{i}]"), format!("expected a number, found {x}")))
        })
        .collect()
}

fn parse_graph(v: &Value, path: &str) -> Result<(Graph, Option<Vec<f64>>)> {
    let obj = v
        .as_object()
        .ok_or_else(|| err(path, "expected a graph object"))?;
    for key in obj.keys() {
        if !["n", "edges", "features", "labels", "graph_label", "targets"].contains(&key.as_str()) {
            return Err(err(&format!("{path}.{key}"), "unknown field"));
        }
    }
    let n_path = format!("{path}.n");
    let n = as_index(obj.get("n").ok_or_else(|| err(&n_path, "missing field"))?, &n_path)?;
    if n == 0 {
        return Err(err(&n_path, "graph must have at least one node"));
    }
    let e_path = format!("{path}.edges");
    let raw = as_array(obj.get("edges").ok_or_else(|| err(&e_path, "missing field"))?, &e_path)?;
    let mut edges = Vec::with_capacity(raw.len());
    let mut seen = std::collections::BTreeSet::new();
    for (k, e) in raw.iter().enumerate() {
        let p = format!("{e_path}[{k}]");
        let pair = as_array(e, &p)?;
        if pair.len() != 2 {
            return Err(err(&p, "an edge has exactly two endpoints"));
        }
        let (i, j) = (as_index(&pair[0], &p)?, as_index(&pair[1], &p)?);
        if i >= n || j >= n {
            return Err(err(&p, format!("endpoint outside 0..{n}")));
        }
        if i == j {
            return Err(err(&p, format!("self-loop on node {i}")));
        }
        if !seen.insert((i.min(j), i.max(j))) {
            return Err(err(&p, format!("duplicate edge ({i}, {j})")));
        }
        edges.push((i, j));
    }
    let mut g = Graph::new(n, edges).map_err(|e| err(path, e.to_string()))?;

    if let Some(f) = obj.get("features").filter(|f| !f.is_null()) {
        let f_path = format!("{path}.features");
        let rows = as_array(f, &f_path)?;
        if rows.len() != n {
            return Err(err(&f_path, format!("{} rows for {n} nodes", rows.len())));
        }
        let parsed: Vec<Vec<f64>> = rows
            .iter()
            .enumerate()
            .map(|(i, r)| as_reals(r, &format!("{f_path}[{i}]")))
            .collect::<Result<_>>()?;
        let d = parsed[0].len();
        if let Some(i) = parsed.iter().position(|r| r.len() != d) {
            return Err(err(&format!("{f_path}[{i}]"), format!("expected {d} columns")));
        }
        g = g.with_features(DMatrix::from_fn(n, d, |i, j| parsed[i][j]))?;
    }
    if let Some(l) = obj.get("labels").filter(|l| !l.is_null()) {
        let l_path = format!("{path}.labels");
        let labels: Vec<usize> = as_array(l, &l_path)?
            .iter()
            .enumerate()
            .map(|(i, x)| as_index(x, &format!("{l_path}[{i}]")))
            .collect::<Result<_>>()?;
        g = g
            .with_node_labels(labels)
            .map_err(|e| err(&l_path, e.to_string()))?;
    }
    if let Some(l) = obj.get("graph_label").filter(|l| !l.is_null()) {
        g = g.with_graph_label(as_index(l, &format!("{path}.graph_label"))?);
    }
    let targets = match obj.get("targets").filter(|t| !t.is_null()) {
        Some(t) => Some(as_reals(t, &format!("{path}.targets"))?),
        None => None,
    };
    Ok((g, targets))
}

/// Parses graph JSON text; errors name the offending JSON path (`$[2].edges[0]`).
pub fn parse_graphs(text: &str) -> Result<(Vec<Graph>, Option<Vec<Vec<f64>>>)> {
    let v: Value = serde_json::from_str(text).map_err(|e| {
        err(&format!("line {} column {}", e.line(), e.column()), e.to_string())
    })?;
    let parsed = match &v {
        Value::Array(items) => items
            .iter()
            .enumerate()
            .map(|(i, item)| parse_graph(item, &format!("$[{i}]")))
            .collect::<Result<Vec<_>>>()?,
        _ => vec![parse_graph(&v, "$")?],
    };
    let with_targets = parsed.iter().filter(|p| p.1.is_some()).count();
    if with_targets != 0 && with_targets != parsed.len() {
        return Err(err("$", "either every graph or no graph must carry targets"));
    }
    let (graphs, targets): (Vec<Graph>, Vec<Option<Vec<f64>>>) = parsed.into_iter().unzip();
    let targets = (with_targets > 0).then(|| targets.into_iter().flatten().collect());
    Ok((graphs, targets))
}

fn read(path: &Path) -> Result<(Vec<Graph>, Option<Vec<Vec<f64>>>)> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_graphs(&text).map_err(|e| match e {
        Error::Json { path: p, message } => Error::Json {
            path: format!("{}: {p}", path.display()),
            message,
        },
        other => other,
    })
}

/// Loads graphs, ignoring any regression targets.
pub fn load_graphs(path: &Path) -> Result<Vec<Graph>> {
    Ok(read(path)?.0)
}

/// Loads a labeled dataset; the task is inferred from the labels present.
pub fn load_json_graphs(path: &Path) -> Result<Dataset> {
    let (graphs, targets) = read(path)?;
    let name = path
        .file_stem()
        .map_or_else(|| "dataset".to_string(), |s| s.to_string_lossy().into_owned());
    Dataset::infer(name, graphs, targets)
}

pub fn graph_to_json(g: &Graph, targets: Option<&[f64]>) -> Value {
    let mut obj = Map::new();
    obj.insert("n".into(), json!(g.n_nodes()));
    obj.insert("edges".into(), json!(g.edges().iter().map(|&(i, j)| [i, j]).collect::<Vec<_>>()));
    if let Some(f) = g.features() {
        let rows: Vec<Vec<f64>> = f.row_iter().map(|r| r.iter().copied().collect()).collect();
        obj.insert("features".into(), json!(rows));
    }
    if let Some(l) = g.node_labels() {
        obj.insert("labels".into(), json!(l));
    }
    if let Some(l) = g.graph_label() {
        obj.insert("graph_label".into(), json!(l));
    }
    if let Some(t) = targets {
        obj.insert("targets".into(), json!(t));
    }
    Value::Object(obj)
}

pub fn graphs_to_json(graphs: &[Graph], targets: Option<&[Vec<f64>]>) -> Value {
    Value::Array(
        graphs
            .iter()
            .enumerate()
            .map(|(i, g)| graph_to_json(g, targets.map(|t| t[i].as_slice())))
            .collect(),
    )
}

/// Writes graphs as a JSON array.
pub fn save_json_graphs(path: &Path, graphs: &[Graph], targets: Option<&[Vec<f64>]>) -> Result<()> {
    let text = serde_json::to_string_pretty(&graphs_to_json(graphs, targets)).expect("graph JSON is serializable");
    std::fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::path;

    #[test]
    fn single_object() {
        let (gs, t) = parse_graphs(r#"{"n": 3, "edges": [[0, 1], [1, 2]]}"#).unwrap();
        assert_eq!(gs.len(), 1);
        assert_eq!(gs[0], path(3));
        assert!(t.is_none());
    }

    #[test]
    fn self_loop_is_located() {
        let e = parse_graphs(r#"[{"n": 2, "edges": [[0, 1]]}, {"n": 2, "edges": [[1, 0], [0, 0]]}]"#)
            .unwrap_err();
        match e {
            Error::Json { path, message } => {
                assert_eq!(path, "$[1].edges[1]");
                assert!(message.contains("self-loop"));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn schema_violations() {
        assert!(parse_graphs(r#"{"n": 2, "edges": [[0, 2]]}"#).is_err());
        assert!(parse_graphs(r#"{"n": 2, "edges": [[0, 1, 1]]}"#).is_err());
        assert!(parse_graphs(r#"{"n": 2}"#).is_err());
        assert!(parse_graphs(r#"{"n": 2, "edges": [], "color": 1}"#).is_err());
        assert!(parse_graphs(r#"{"n": 2, "edges": [], "features": [[1.0], [1.0, 2.0]]}"#).is_err());
        assert!(parse_graphs(r#"{"n": 2, "edges": [], "labels": [0]}"#).is_err());
        let mixed = r#"[{"n": 1, "edges": [], "targets": [1.0]}, {"n": 1, "edges": []}]"#;
        assert!(parse_graphs(mixed).is_err());
        assert!(parse_graphs("[{").is_err());
    }

    #[test]
    fn roundtrip_with_everything() {
        let g = path(3)
            .with_features(DMatrix::from_row_slice(3, 2, &[0.1, 1.0 / 3.0, -2.5e-17, 4.0, 5.5, 6.0]))
            .unwrap()
            .with_node_labels(vec![1, 0, 1])
            .unwrap()
            .with_graph_label(2);
        let targets = vec![vec![std::f64::consts::PI, -1e300]];
        let text = serde_json::to_string(&graphs_to_json(&[g.clone()], Some(&targets))).unwrap();
        let (gs, t) = parse_graphs(&text).unwrap();
        assert_eq!(gs, vec![g]);
        assert_eq!(t, Some(targets));
    }
}
