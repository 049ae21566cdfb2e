//! TUDataset text format: `DS_A.txt`, `DS_graph_indicator.txt`,
//! `DS_graph_labels.txt`, optionally `DS_node_attributes.txt` and
//! `DS_node_labels.txt`, all 1-indexed.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;

use super::Dataset;
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::model::Task;

#[derive(Debug, Clone)]
pub struct TuDataset {
    pub dataset: Dataset,
    /// Original graph label → dense class index.
    pub label_map: BTreeMap<i64, usize>,
    /// Original node label → dense index, when node labels are present.
    pub node_label_map: Option<BTreeMap<i64, usize>>,
}

fn data_error(file: &Path, line: usize, message: impl std::fmt::Display) -> Error {
    Error::Data(format!("{}:{line}: {message}", file.display()))
}

/// Non-empty lines with their 1-based line numbers.
fn lines(file: &Path) -> Result<Vec<(usize, String)>> {
    let text = std::fs::read_to_string(file).map_err(|e| Error::io(file, e))?;
    Ok(text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| (i + 1, l.trim().to_string()))
        .collect())
}

fn parse_fields<T: std::str::FromStr>(file: &Path, line: usize, text: &str) -> Result<Vec<T>> {
    text.split(',')
        .map(|f| {
            f.trim()
                .parse::<T>()
                .map_err(|_| data_error(file, line, format!("cannot parse {:?}", f.trim())))
        })
        .collect()
}

fn single<T: std::str::FromStr>(file: &Path, line: usize, text: &str) -> Result<T> {
    let mut v = parse_fields(file, line, text)?;
    if v.len() != 1 {
        return Err(data_error(file, line, "expected a single value"));
    }
    Ok(v.remove(0))
}

fn dense_map(values: &[i64]) -> BTreeMap<i64, usize> {
    let set: BTreeSet<i64> = values.iter().copied().collect();
    set.into_iter().enumerate().map(|(i, v)| (v, i)).collect()
}

/// Locates the `DS` prefix from the `*_A.txt` file in `dir`.
fn prefix(dir: &Path) -> Result<String> {
    let entries = std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    let mut found = Vec::new();
    for entry in entries {
        let name = entry.map_err(|e| Error::io(dir, e))?.file_name();
        if let Some(stem) = name.to_string_lossy().strip_suffix("_A.txt") {
            found.push(stem.to_string());
        }
    }
    found.sort();
    match found.as_slice() {
        [one] => Ok(one.clone()),
        [] => Err(Error::Data(format!("{}: no *_A.txt edge file", dir.display()))),
        _ => Err(Error::Data(format!("{}: several *_A.txt files: {found:?}", dir.display()))),
    }
}

pub fn parse_tudataset(dir: &Path) -> Result<TuDataset> {
    let ds = prefix(dir)?;
    let file = |suffix: &str| -> PathBuf { dir.join(format!("{ds}_{suffix}.txt")) };
    let required = |suffix: &str| -> Result<PathBuf> {
        let f = file(suffix);
        if f.is_file() {
            Ok(f)
        } else {
            Err(Error::Data(format!("missing mandatory file {}", f.display())))
        }
    };
    let a_file = required("A")?;
    let ind_file = required("graph_indicator")?;
    let lab_file = required("graph_labels")?;

    let indicator: Vec<usize> = lines(&ind_file)?
        .iter()
        .map(|(ln, l)| {
            let g: usize = single(&ind_file, *ln, l)?;
            if g == 0 {
                return Err(data_error(&ind_file, *ln, "graph ids are 1-indexed"));
            }
            Ok(g - 1)
        })
        .collect::<Result<_>>()?;
    let raw_labels: Vec<i64> = lines(&lab_file)?
        .iter()
        .map(|(ln, l)| single(&lab_file, *ln, l))
        .collect::<Result<_>>()?;
    let n_graphs = raw_labels.len();
    if let Some(pos) = indicator.iter().position(|&g| g >= n_graphs) {
        return Err(data_error(
            &ind_file,
            pos + 1,
            format!("graph {} but only {n_graphs} graph labels", indicator[pos] + 1),
        ));
    }
    if let Some(pos) = indicator.windows(2).position(|w| w[1] < w[0]) {
        return Err(data_error(&ind_file, pos + 2, "graph ids must be non-decreasing"));
    }

    // global node -> (graph, local index)
    let mut sizes = vec![0usize; n_graphs];
    let local: Vec<usize> = indicator
        .iter()
        .map(|&g| {
            sizes[g] += 1;
            sizes[g] - 1
        })
        .collect();
    if let Some(g) = sizes.iter().position(|&s| s == 0) {
        return Err(Error::Data(format!("graph {} has no nodes", g + 1)));
    }

    let mut edges = vec![BTreeSet::new(); n_graphs];
    for (ln, l) in lines(&a_file)? {
        let pair: Vec<usize> = parse_fields(&a_file, ln, &l)?;
        let [u, v] = pair[..] else {
            return Err(data_error(&a_file, ln, "expected two node ids"));
        };
        for x in [u, v] {
            if x == 0 || x > indicator.len() {
                return Err(data_error(
                    &a_file,
                    ln,
                    format!("node {x} outside 1..={}", indicator.len()),
                ));
            }
        }
        let (u, v) = (u - 1, v - 1);
        if indicator[u] != indicator[v] {
            return Err(data_error(
                &a_file,
                ln,
                format!("edge joins graphs {} and {}", indicator[u] + 1, indicator[v] + 1),
            ));
        }
        if u == v {
            return Err(data_error(&a_file, ln, format!("self-loop on node {}", u + 1)));
        }
        let (a, b) = (local[u], local[v]);
        edges[indicator[u]].insert((a.min(b), a.max(b)));
    }

    let attributes = match file("node_attributes") {
        f if f.is_file() => {
            let rows: Vec<Vec<f64>> = lines(&f)?
                .iter()
                .map(|(ln, l)| parse_fields(&f, *ln, l))
                .collect::<Result<_>>()?;
            if rows.is_empty() {
                None
            } else if rows.len() != indicator.len() {
                return Err(Error::Data(format!(
                    "{}: {} rows for {} nodes",
                    f.display(),
                    rows.len(),
                    indicator.len()
                )));
            } else {
                let d = rows[0].len();
                if let Some(i) = rows.iter().position(|r| r.len() != d) {
                    return Err(data_error(&f, i + 1, format!("expected {d} attributes")));
                }
                Some(rows)
            }
        }
        _ => None,
    };
    let node_labels = match file("node_labels") {
        f if f.is_file() => {
            let raw: Vec<i64> = lines(&f)?
                .iter()
                .map(|(ln, l)| single(&f, *ln, l))
                .collect::<Result<_>>()?;
            if raw.is_empty() {
                None
            } else if raw.len() != indicator.len() {
                return Err(Error::Data(format!(
                    "{}: {} labels for {} nodes",
                    f.display(),
                    raw.len(),
                    indicator.len()
                )));
            } else {
                Some(raw)
            }
        }
        _ => None,
    };
    let node_label_map = node_labels.as_deref().map(dense_map);

    let label_map = dense_map(&raw_labels);
    let mut graphs = Vec::with_capacity(n_graphs);
    let mut start = 0;
    for (gi, (&size, e)) in sizes.iter().zip(edges).enumerate() {
        let mut g = Graph::new(size, e)?.with_graph_label(label_map[&raw_labels[gi]]);
        if let Some(rows) = &attributes {
            let d = rows[0].len();
            g = g.with_features(DMatrix::from_fn(size, d, |i, j| rows[start + i][j]))?;
        }
        if let (Some(raw), Some(map)) = (&node_labels, &node_label_map) {
            g = g.with_node_labels(raw[start..start + size].iter().map(|l| map[l]).collect())?;
        }
        graphs.push(g);
        start += size;
    }
    let dataset = Dataset::new(ds, Task::GraphClassification(label_map.len()), graphs, None)?;
    Ok(TuDataset {
        dataset,
        label_map,
        node_label_map,
    })
}

/// Writes a graph-classification dataset as `<prefix>_*.txt` files in `dir`.
/// Graph labels are written as dense class indices; features become node
/// attributes.
pub fn write_tudataset(d: &Dataset, dir: &Path, prefix: &str) -> Result<Vec<PathBuf>> {
    if !matches!(d.task, Task::GraphClassification(_)) {
        return Err(Error::InvalidArgument("only graph classification datasets can be written".into()));
    }
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let (mut a, mut ind, mut gl, mut attr, mut nl) = (String::new(), String::new(), String::new(), String::new(), String::new());
    let mut offset = 1;
    for (gi, g) in d.graphs.iter().enumerate() {
        for &(i, j) in g.edges() {
            a += &format!("{}, {}\n{}, {}\n", i + offset, j + offset, j + offset, i + offset);
        }
        for v in 0..g.n_nodes() {
            ind += &format!("{}\n", gi + 1);
            if let Some(x) = g.features() {
                let row: Vec<String> = x.row(v).iter().map(|f| f.to_string()).collect();
                attr += &(row.join(", ") + "\n");
            }
            if let Some(l) = g.node_labels() {
                nl += &format!("{}\n", l[v]);
            }
        }
        gl += &format!("{}\n", g.graph_label().expect("validated dataset"));
        offset += g.n_nodes();
    }
    let mut files = vec![("A", a), ("graph_indicator", ind), ("graph_labels", gl)];
    if !attr.is_empty() {
        files.push(("node_attributes", attr));
    }
    if !nl.is_empty() {
        files.push(("node_labels", nl));
    }
    files
        .into_iter()
        .map(|(name, text)| {
            let path = dir.join(format!("{prefix}_{name}.txt"));
            std::fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
            Ok(path)
        })
        .collect()
}
