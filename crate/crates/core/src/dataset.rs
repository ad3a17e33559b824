//! Labeled citation datasets: ingestion of the tab-separated content/cites
//! format, largest-component extraction and random train/test splits.

use std::collections::HashMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::DirectedGraph;
use crate::matrix::DenseMatrix;

/// How a cites line `a b` is turned into a directed edge.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EdgeDirection {
    /// Lines list `cited citing`; the edge points from the citing paper `b` to
    /// the cited paper `a`.
    #[default]
    CitingToCited,
    /// The edge points from `a` to `b`.
    CitedToCiting,
}

/// Bookkeeping from loading a dataset.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LoadReport {
    /// Non-empty lines in the cites file.
    pub raw_edges: usize,
    /// Lines referencing an id absent from the content file.
    pub unknown_endpoint: usize,
    pub self_loops: usize,
    pub duplicate_edges: usize,
    /// Pairs of nodes linked in both directions.
    pub reciprocal_pairs: usize,
}

#[derive(Clone, Debug)]
pub struct LabeledDataset {
    pub graph: DirectedGraph,
    pub labels: Vec<usize>,
    pub n_classes: usize,
    pub class_names: Vec<String>,
    pub external_features: Option<DenseMatrix>,
    pub node_ids: Vec<String>,
}

impl LabeledDataset {
    pub fn new(
        graph: DirectedGraph,
        labels: Vec<usize>,
        n_classes: usize,
        node_ids: Vec<String>,
    ) -> Result<Self> {
        let n = graph.n_nodes();
        if labels.len() != n || node_ids.len() != n {
            return Err(Error::shape(format!(
                "{n} nodes but {} labels and {} ids",
                labels.len(),
                node_ids.len()
            )));
        }
        if let Some(&bad) = labels.iter().find(|&&c| c >= n_classes) {
            return Err(Error::invalid(format!(
                "label {bad} outside 0..{n_classes}"
            )));
        }
        Ok(LabeledDataset {
            graph,
            labels,
            n_classes,
            class_names: (0..n_classes).map(|c| c.to_string()).collect(),
            external_features: None,
            node_ids,
        })
    }

    pub fn with_features(mut self, features: DenseMatrix) -> Result<Self> {
        if features.rows() != self.n_nodes() {
            return Err(Error::shape(format!(
                "feature matrix has {} rows for {} nodes",
                features.rows(),
                self.n_nodes()
            )));
        }
        self.external_features = Some(features);
        Ok(self)
    }

    pub fn n_nodes(&self) -> usize {
        self.graph.n_nodes()
    }

    /// Number of nodes in each class.
    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.n_classes];
        for &c in &self.labels {
            counts[c] += 1;
        }
        counts
    }

    /// Restricts the dataset to `nodes` (sorted, distinct).
    pub fn induced(&self, nodes: &[usize]) -> LabeledDataset {
        LabeledDataset {
            graph: self.graph.induced_subgraph(nodes),
            labels: nodes.iter().map(|&u| self.labels[u]).collect(),
            n_classes: self.n_classes,
            class_names: self.class_names.clone(),
            external_features: self
                .external_features
                .as_ref()
                .map(|f| f.select_rows(nodes)),
            node_ids: nodes.iter().map(|&u| self.node_ids[u].clone()).collect(),
        }
    }

    /// Relabels nodes so that old node `u` becomes `perm[u]`.
    pub fn permute(&self, perm: &[usize]) -> LabeledDataset {
        let n = self.n_nodes();
        let mut inverse = vec![0; n];
        for (old, &new) in perm.iter().enumerate() {
            inverse[new] = old;
        }
        LabeledDataset {
            graph: self.graph.permute(perm),
            labels: inverse.iter().map(|&old| self.labels[old]).collect(),
            n_classes: self.n_classes,
            class_names: self.class_names.clone(),
            external_features: self
                .external_features
                .as_ref()
                .map(|f| f.select_rows(&inverse)),
            node_ids: inverse
                .iter()
                .map(|&old| self.node_ids[old].clone())
                .collect(),
        }
    }
}

fn read_nonempty(path: &Path) -> Result<String> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    if text.trim().is_empty() {
        return Err(Error::EmptyFile { path: path.into() });
    }
    Ok(text)
}

fn fields(line: &str) -> Vec<&str> {
    if line.contains('\t') {
        line.split('\t')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .collect()
    } else {
        line.split_whitespace().collect()
    }
}

/// Loads a content file (`id f_1 … f_F label`) and a cites file (`a b`).
pub fn load_citation_dataset(
    content_path: impl AsRef<Path>,
    cites_path: impl AsRef<Path>,
    direction: EdgeDirection,
) -> Result<(LabeledDataset, LoadReport)> {
    let content_path = content_path.as_ref();
    let cites_path = cites_path.as_ref();
    let content = read_nonempty(content_path)?;

    let mut index: HashMap<String, usize> = HashMap::new();
    let mut node_ids = Vec::new();
    let mut class_index: HashMap<String, usize> = HashMap::new();
    let mut class_names = Vec::new();
    let mut labels = Vec::new();
    let mut features: Vec<f64> = Vec::new();
    let mut n_features: Option<usize> = None;

    for (lineno, line) in content.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let parse_err = |message: String| Error::Parse {
            path: content_path.into(),
            line: lineno + 1,
            message,
        };
        let f = fields(line);
        if f.len() < 2 {
            return Err(parse_err("expected `id [features…] label`".into()));
        }
        let width = f.len() - 2;
        match n_features {
            None => n_features = Some(width),
            Some(w) if w != width => {
                return Err(parse_err(format!(
                    "{width} features, previous lines had {w}"
                )));
            }
            Some(_) => {}
        }
        for tok in &f[1..f.len() - 1] {
            let v: f64 = match *tok {
                "0" => 0.0,
                "1" => 1.0,
                other => other
                    .parse()
                    .map_err(|_| parse_err(format!("feature `{other}` is not numeric")))?,
            };
            features.push(v);
        }
        let id = f[0].to_string();
        if index.contains_key(&id) {
            return Err(Error::DuplicateNode(id));
        }
        index.insert(id.clone(), node_ids.len());
        node_ids.push(id);
        let label = f[f.len() - 1];
        let next = class_index.len();
        let c = *class_index.entry(label.to_string()).or_insert_with(|| {
            class_names.push(label.to_string());
            next
        });
        labels.push(c);
    }

    let cites = read_nonempty(cites_path)?;
    let mut report = LoadReport::default();
    let mut edges = Vec::new();
    for (lineno, line) in cites.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let f = fields(line);
        if f.len() != 2 {
            return Err(Error::Parse {
                path: cites_path.into(),
                line: lineno + 1,
                message: format!("expected 2 ids, found {}", f.len()),
            });
        }
        report.raw_edges += 1;
        let (Some(&a), Some(&b)) = (index.get(f[0]), index.get(f[1])) else {
            report.unknown_endpoint += 1;
            continue;
        };
        edges.push(match direction {
            EdgeDirection::CitingToCited => (b, a),
            EdgeDirection::CitedToCiting => (a, b),
        });
    }

    let n = node_ids.len();
    let (graph, edge_report) = DirectedGraph::from_edges(n, edges);
    report.self_loops = edge_report.self_loops;
    report.duplicate_edges = edge_report.duplicates;
    report.reciprocal_pairs = graph
        .edges()
        .filter(|&(u, v)| u < v && graph.has_edge(v, u))
        .count();

    let n_classes = class_names.len();
    let width = n_features.unwrap_or(0);
    let mut ds = LabeledDataset::new(graph, labels, n_classes, node_ids)?;
    ds.class_names = class_names;
    ds = ds.with_features(DenseMatrix::from_vec(n, width, features)?)?;
    Ok((ds, report))
}

/// Paths `<prefix>.content` and `<prefix>.cites`.
pub fn dataset_paths(prefix: impl AsRef<Path>) -> (PathBuf, PathBuf) {
    let prefix = prefix.as_ref();
    let with_ext = |ext: &str| {
        let mut s = prefix.as_os_str().to_owned();
        s.push(ext);
        PathBuf::from(s)
    };
    (with_ext(".content"), with_ext(".cites"))
}

/// Induced subgraph on the largest weakly connected component.
pub fn largest_connected_subgraph(ds: &LabeledDataset) -> LabeledDataset {
    ds.induced(&ds.graph.largest_weak_component())
}

/// A train/test partition of the node set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SplitMask {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
    pub seed: u64,
    pub train_fraction: f64,
    in_train: Vec<bool>,
}

impl SplitMask {
    /// Builds a mask on `n` nodes from the training set; all other nodes are test.
    pub fn from_train(n: usize, train: &[usize], seed: u64, train_fraction: f64) -> Self {
        let mut in_train = vec![false; n];
        for &u in train {
            in_train[u] = true;
        }
        let train: Vec<usize> = (0..n).filter(|&u| in_train[u]).collect();
        let test = (0..n).filter(|&u| !in_train[u]).collect();
        SplitMask {
            train,
            test,
            seed,
            train_fraction,
            in_train,
        }
    }

    #[inline]
    pub fn is_train(&self, u: usize) -> bool {
        self.in_train[u]
    }

    pub fn n_nodes(&self) -> usize {
        self.in_train.len()
    }

    pub fn permute(&self, perm: &[usize]) -> SplitMask {
        let train: Vec<usize> = self.train.iter().map(|&u| perm[u]).collect();
        SplitMask::from_train(self.n_nodes(), &train, self.seed, self.train_fraction)
    }
}

/// `n_splits` uniform random splits. Split `i` is drawn from its own seed
/// `seed + i`, so any split can be regenerated alone.
pub fn make_splits(
    n_nodes: usize,
    train_fraction: f64,
    n_splits: usize,
    seed: u64,
) -> Result<Vec<SplitMask>> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::invalid(format!(
            "train fraction {train_fraction} not in (0, 1)"
        )));
    }
    if n_splits == 0 {
        return Err(Error::invalid("need at least one split"));
    }
    let n_train = (train_fraction * n_nodes as f64).round() as usize;
    if n_train == 0 || n_train >= n_nodes {
        return Err(Error::invalid(format!(
            "train fraction {train_fraction} on {n_nodes} nodes leaves an empty train or test set"
        )));
    }
    Ok((0..n_splits as u64)
        .map(|i| {
            let split_seed = seed.wrapping_add(i);
            let mut rng = ChaCha8Rng::seed_from_u64(split_seed);
            let mut order: Vec<usize> = (0..n_nodes).collect();
            order.shuffle(&mut rng);
            SplitMask::from_train(n_nodes, &order[..n_train], split_seed, train_fraction)
        })
        .collect())
}

/// Writes `<prefix>.edges` (`u v` node indices) and `<prefix>.labels`
/// (`node_id<TAB>class_name`, one line per node in index order).
pub fn write_edge_list(ds: &LabeledDataset, prefix: impl AsRef<Path>) -> Result<()> {
    let prefix = prefix.as_ref();
    let edges_path = prefix.with_extension("edges");
    let labels_path = prefix.with_extension("labels");
    let mut out = Vec::new();
    for (u, v) in ds.graph.edges() {
        writeln!(out, "{u} {v}").expect("write to Vec");
    }
    fs::write(&edges_path, out).map_err(|e| Error::io(&edges_path, e))?;
    let mut out = Vec::new();
    for (id, &c) in ds.node_ids.iter().zip(&ds.labels) {
        writeln!(out, "{id}\t{}", ds.class_names[c]).expect("write to Vec");
    }
    fs::write(&labels_path, out).map_err(|e| Error::io(&labels_path, e))?;
    Ok(())
}

/// Reads the pair of files produced by [`write_edge_list`].
pub fn read_edge_list(prefix: impl AsRef<Path>) -> Result<LabeledDataset> {
    let prefix = prefix.as_ref();
    let labels_path = prefix.with_extension("labels");
    let edges_path = prefix.with_extension("edges");
    let labels_text = read_nonempty(&labels_path)?;
    let mut node_ids = Vec::new();
    let mut class_names: Vec<String> = Vec::new();
    let mut labels = Vec::new();
    for (lineno, line) in labels_text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let f = fields(line);
        if f.len() != 2 {
            return Err(Error::Parse {
                path: labels_path.clone(),
                line: lineno + 1,
                message: "expected `id label`".into(),
            });
        }
        node_ids.push(f[0].to_string());
        let c = match class_names.iter().position(|c| c == f[1]) {
            Some(c) => c,
            None => {
                class_names.push(f[1].to_string());
                class_names.len() - 1
            }
        };
        labels.push(c);
    }
    let n = node_ids.len();
    let edges_text = fs::read_to_string(&edges_path).map_err(|e| Error::io(&edges_path, e))?;
    let mut edges = Vec::new();
    for (lineno, line) in edges_text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let parsed: Option<Vec<usize>> = line.split_whitespace().map(|t| t.parse().ok()).collect();
        match parsed.as_deref() {
            Some(&[u, v]) if u < n && v < n => edges.push((u, v)),
            _ => {
                return Err(Error::Parse {
                    path: edges_path.clone(),
                    line: lineno + 1,
                    message: format!("expected two node indices below {n}"),
                })
            }
        }
    }
    let (graph, _) = DirectedGraph::from_edges(n, edges);
    let mut ds = LabeledDataset::new(graph, labels, class_names.len(), node_ids)?;
    ds.class_names = class_names;
    Ok(ds)
}
