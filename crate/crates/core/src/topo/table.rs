use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::*;
use crate::error::{Error, Result};
use crate::graph::DirectedGraph;
use crate::matrix::DenseMatrix;

/// Parameters of the topological measures.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FeatureParams {
    pub flow_threshold: f64,
    pub attraction_alpha: f64,
    pub pagerank_damping: f64,
    pub pagerank_tol: f64,
    pub louvain_seed: u64,
    pub include_motif3: bool,
    pub include_motif4: bool,
    pub motif_mode: MotifMode,
}

impl Default for FeatureParams {
    fn default() -> Self {
        FeatureParams {
            flow_threshold: 0.5,
            attraction_alpha: 2.0,
            pagerank_damping: 0.85,
            pagerank_tol: 1e-10,
            louvain_seed: 0,
            include_motif3: true,
            include_motif4: true,
            motif_mode: MotifMode::Directed,
        }
    }
}

impl FeatureParams {
    /// Column names produced by [`extract_all`] with these parameters.
    ///
    /// The scalar measures come first in a fixed order, followed by
    /// `motif3_XX` and `motif4_XXX` columns numbered by motif class.
    pub fn column_names(&self) -> Result<Vec<String>> {
        let mut names: Vec<String> = SCALAR_COLUMNS.iter().map(|s| s.to_string()).collect();
        for (size, on) in [(3, self.include_motif3), (4, self.include_motif4)] {
            if on {
                let n = MotifCatalog::get(size, self.motif_mode)?.n_classes();
                names.extend((0..n).map(|c| motif_column(size, c)));
            }
        }
        Ok(names)
    }
}

const SCALAR_COLUMNS: [&str; 16] = [
    "in_degree",
    "out_degree",
    "average_neighbor_degree",
    "betweenness",
    "load",
    "closeness",
    "eccentricity",
    "bfs_mean",
    "bfs_second_moment",
    "flow",
    "attraction_basin",
    "k_core",
    "louvain_community_size",
    "louvain_community_id",
    "page_rank",
    "fiedler",
];

fn motif_column(size: usize, class: usize) -> String {
    if size == 3 {
        format!("motif3_{class:02}")
    } else {
        format!("motif4_{class:03}")
    }
}

/// Node × named-feature table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeatureTable {
    n_nodes: usize,
    columns: Vec<(String, Vec<f64>)>,
    pub provenance: FeatureParams,
}

impl FeatureTable {
    pub fn new(n_nodes: usize, provenance: FeatureParams) -> Self {
        FeatureTable {
            n_nodes,
            columns: Vec::new(),
            provenance,
        }
    }

    /// Appends a column. Fails on a duplicate name, wrong length or
    /// non-finite values.
    pub fn push(&mut self, name: impl Into<String>, values: Vec<f64>) -> Result<()> {
        let name = name.into();
        if values.len() != self.n_nodes {
            return Err(Error::shape(format!(
                "column `{name}` has {} values for {} nodes",
                values.len(),
                self.n_nodes
            )));
        }
        if self.columns.iter().any(|(n, _)| *n == name) {
            return Err(Error::invalid(format!("duplicate column `{name}`")));
        }
        if let Some(i) = values.iter().position(|x| !x.is_finite()) {
            return Err(Error::invalid(format!(
                "column `{name}` is not finite at node {i}"
            )));
        }
        self.columns.push((name, values));
        Ok(())
    }

    pub fn n_nodes(&self) -> usize {
        self.n_nodes
    }

    pub fn n_columns(&self) -> usize {
        self.columns.len()
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.columns.iter().map(|(n, _)| n.as_str())
    }

    pub fn columns(&self) -> impl Iterator<Item = (&str, &[f64])> {
        self.columns.iter().map(|(n, v)| (n.as_str(), v.as_slice()))
    }

    pub fn column(&self, name: &str) -> Option<&[f64]> {
        self.columns
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, v)| v.as_slice())
    }

    /// Node × column matrix in column order.
    pub fn to_matrix(&self) -> DenseMatrix {
        let mut m = DenseMatrix::zeros(self.n_nodes, self.columns.len());
        for (j, (_, col)) in self.columns.iter().enumerate() {
            for (i, &x) in col.iter().enumerate() {
                m[(i, j)] = x;
            }
        }
        m
    }

    /// Same table with every column z-scored.
    pub fn normalized(&self) -> FeatureTable {
        FeatureTable {
            n_nodes: self.n_nodes,
            columns: self
                .columns
                .iter()
                .map(|(n, v)| (n.clone(), zscore(v)))
                .collect(),
            provenance: self.provenance.clone(),
        }
    }

    /// Writes a header `node_id,<names…>` and one row per node.
    pub fn write_csv<W: Write>(&self, out: W, node_ids: &[String]) -> Result<()> {
        if node_ids.len() != self.n_nodes {
            return Err(Error::shape(format!(
                "{} ids for {} rows",
                node_ids.len(),
                self.n_nodes
            )));
        }
        let mut w = csv::Writer::from_writer(out);
        let header = std::iter::once("node_id").chain(self.names());
        w.write_record(header).map_err(csv_error)?;
        for (i, id) in node_ids.iter().enumerate() {
            let row = std::iter::once(id.clone())
                .chain(self.columns.iter().map(|(_, v)| v[i].to_string()));
            w.write_record(row).map_err(csv_error)?;
        }
        w.flush()
            .map_err(|e| Error::invalid(format!("csv flush: {e}")))?;
        Ok(())
    }

    /// Reads a table written by [`FeatureTable::write_csv`], returning the node
    /// ids alongside it. Provenance is set to the given parameters.
    pub fn read_csv<R: Read>(
        input: R,
        provenance: FeatureParams,
    ) -> Result<(Vec<String>, FeatureTable)> {
        let mut r = csv::Reader::from_reader(input);
        let header: Vec<String> = r
            .headers()
            .map_err(csv_error)?
            .iter()
            .map(String::from)
            .collect();
        if header.first().map(String::as_str) != Some("node_id") {
            return Err(Error::invalid(
                "feature csv must start with a node_id column",
            ));
        }
        let mut ids = Vec::new();
        let mut cols: Vec<Vec<f64>> = vec![Vec::new(); header.len() - 1];
        for (lineno, rec) in r.records().enumerate() {
            let rec = rec.map_err(csv_error)?;
            ids.push(rec[0].to_string());
            for (j, field) in rec.iter().skip(1).enumerate() {
                let x = field.parse::<f64>().map_err(|_| {
                    Error::invalid(format!("row {}: `{field}` is not a number", lineno + 2))
                })?;
                cols[j].push(x);
            }
        }
        let mut table = FeatureTable::new(ids.len(), provenance);
        for (name, col) in header.into_iter().skip(1).zip(cols) {
            table.push(name, col)?;
        }
        Ok((ids, table))
    }
}

fn csv_error(e: csv::Error) -> Error {
    Error::invalid(format!("csv: {e}"))
}

/// `(x − mean) / std` with the population standard deviation; constant
/// columns map to all zeros.
pub fn zscore(values: &[f64]) -> Vec<f64> {
    let n = values.len() as f64;
    if values.is_empty() {
        return Vec::new();
    }
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    let std = var.sqrt();
    if std <= 1e-12 * mean.abs().max(1.0) {
        return vec![0.0; values.len()];
    }
    values.iter().map(|x| (x - mean) / std).collect()
}

/// All measures, un-normalized.
pub fn extract_raw(g: &DirectedGraph, params: &FeatureParams) -> Result<FeatureTable> {
    let mut t = FeatureTable::new(g.n_nodes(), params.clone());
    let (in_deg, out_deg) = degree_features(g);
    t.push("in_degree", in_deg)?;
    t.push("out_degree", out_deg)?;
    t.push("average_neighbor_degree", average_neighbor_degree(g))?;
    t.push("betweenness", betweenness_centrality(g))?;
    t.push("load", load_centrality(g))?;
    t.push("closeness", closeness_centrality(g))?;
    t.push("eccentricity", eccentricity(g))?;
    let (mean, second) = bfs_moments(g);
    t.push("bfs_mean", mean)?;
    t.push("bfs_second_moment", second)?;
    t.push("flow", flow(g, params.flow_threshold))?;
    t.push(
        "attraction_basin",
        attraction_basin(g, params.attraction_alpha),
    )?;
    t.push("k_core", k_core(g))?;
    let (size, id) = louvain_features(g, params.louvain_seed);
    t.push("louvain_community_size", size)?;
    t.push("louvain_community_id", id)?;
    t.push(
        "page_rank",
        pagerank(g, params.pagerank_damping, params.pagerank_tol),
    )?;
    t.push("fiedler", fiedler_vector(g))?;
    for (size, on) in [(3, params.include_motif3), (4, params.include_motif4)] {
        if on {
            for (c, col) in motif_counts(g, size, params.motif_mode)?
                .into_iter()
                .enumerate()
            {
                t.push(motif_column(size, c), col)?;
            }
        }
    }
    Ok(t)
}

/// All measures, each column z-scored.
pub fn extract_all(g: &DirectedGraph, params: &FeatureParams) -> Result<FeatureTable> {
    Ok(extract_raw(g, params)?.normalized())
}
