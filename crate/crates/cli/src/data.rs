//! Dataset loading, content hashing and the on-disk feature cache.

use std::fs;
use std::path::{Path, PathBuf};

use nodeclass::topo::{extract_raw, FeatureParams, FeatureTable};
use nodeclass::{
    largest_connected_subgraph, load_citation_dataset, DenseMatrix, LabeledDataset, LoadReport,
};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::DatasetConfig;
use crate::error::{CliError, Result};

/// What was loaded and from where, as recorded in run manifests.
#[derive(Clone, Debug, Serialize)]
pub struct DatasetSummary {
    pub content: PathBuf,
    pub cites: PathBuf,
    /// SHA-256 over both files and the loading options.
    pub sha256: String,
    pub direction: nodeclass::EdgeDirection,
    pub lcc: bool,
    pub load_report: LoadReport,
    /// Nodes and distinct edges before any restriction.
    pub full_nodes: usize,
    pub full_edges: usize,
    /// Nodes and distinct edges actually used.
    pub nodes: usize,
    pub edges: usize,
    pub n_classes: usize,
    pub class_names: Vec<String>,
    pub class_counts: Vec<usize>,
}

pub struct PreparedData {
    pub dataset: LabeledDataset,
    pub summary: DatasetSummary,
}

pub fn sha256_hex(parts: &[&[u8]]) -> String {
    let mut h = Sha256::new();
    for p in parts {
        h.update((p.len() as u64).to_le_bytes());
        h.update(p);
    }
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

pub fn load_dataset(cfg: &DatasetConfig) -> Result<PreparedData> {
    let (content, cites) = cfg.paths()?;
    let content_bytes = fs::read(&content).map_err(|e| CliError::io(&content, e))?;
    let cites_bytes = fs::read(&cites).map_err(|e| CliError::io(&cites, e))?;
    let options = serde_json::to_vec(&(cfg.direction, cfg.lcc)).expect("options serialize");
    let sha256 = sha256_hex(&[&content_bytes, &cites_bytes, &options]);

    let (full, load_report) = load_citation_dataset(&content, &cites, cfg.direction)?;
    let (full_nodes, full_edges) = (full.n_nodes(), full.graph.n_edges());
    let dataset = if cfg.lcc {
        largest_connected_subgraph(&full)
    } else {
        full
    };
    let summary = DatasetSummary {
        content,
        cites,
        sha256,
        direction: cfg.direction,
        lcc: cfg.lcc,
        load_report,
        full_nodes,
        full_edges,
        nodes: dataset.n_nodes(),
        edges: dataset.graph.n_edges(),
        n_classes: dataset.n_classes,
        class_names: dataset.class_names.clone(),
        class_counts: dataset.class_counts(),
    };
    Ok(PreparedData { dataset, summary })
}

/// Raw (not z-scored) topological measures, read from `cache_dir` when a
/// table for the same dataset and parameters exists there.
pub fn raw_features(
    data: &PreparedData,
    params: &FeatureParams,
    cache_dir: &Path,
) -> Result<FeatureTable> {
    let key = feature_cache_key(data, params);
    let path = cache_dir.join(format!("features-{}.csv", &key[..16]));
    if let Ok(file) = fs::File::open(&path) {
        match FeatureTable::read_csv(std::io::BufReader::new(file), params.clone()) {
            Ok((ids, table)) if ids == data.dataset.node_ids && table.n_nodes() == ids.len() => {
                return Ok(table)
            }
            _ => log_stale(&path),
        }
    }
    let table = extract_raw(&data.dataset.graph, params)?;
    fs::create_dir_all(cache_dir).map_err(|e| CliError::io(cache_dir, e))?;
    let tmp = path.with_extension("csv.tmp");
    let file = fs::File::create(&tmp).map_err(|e| CliError::io(&tmp, e))?;
    table.write_csv(std::io::BufWriter::new(file), &data.dataset.node_ids)?;
    fs::rename(&tmp, &path).map_err(|e| CliError::io(&path, e))?;
    Ok(table)
}

fn log_stale(path: &Path) {
    eprintln!(
        "warning: ignoring unreadable feature cache {}",
        path.display()
    );
}

pub fn feature_cache_key(data: &PreparedData, params: &FeatureParams) -> String {
    let params = serde_json::to_vec(params).expect("params serialize");
    sha256_hex(&[data.summary.sha256.as_bytes(), &params])
}

/// Bag-of-words rows scaled to sum to one.
pub fn bag_of_words(ds: &LabeledDataset) -> Result<DenseMatrix> {
    ds.external_features
        .as_ref()
        .map(DenseMatrix::row_normalized)
        .ok_or_else(|| CliError::Data("the dataset has no word features".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use nodeclass::synthetic::{citation_dataset, write_citation_files, CitationParams};

    #[test]
    fn cache_round_trips_and_hash_tracks_options() {
        let dir = tempfile::tempdir().unwrap();
        let prefix = dir.path().join("toy");
        let params = CitationParams {
            n_nodes: 40,
            ..CitationParams::default()
        };
        write_citation_files(&citation_dataset(&params, 1), &prefix).unwrap();
        let mut cfg = DatasetConfig {
            prefix: Some(prefix),
            ..DatasetConfig::default()
        };
        let data = load_dataset(&cfg).unwrap();
        let fp = FeatureParams {
            include_motif4: false,
            ..FeatureParams::default()
        };
        let cache = dir.path().join("cache");
        let fresh = raw_features(&data, &fp, &cache).unwrap();
        let cached = raw_features(&data, &fp, &cache).unwrap();
        assert_eq!(fresh.to_matrix(), cached.to_matrix());
        assert_eq!(fs::read_dir(&cache).unwrap().count(), 1);

        cfg.lcc = true;
        assert_ne!(
            load_dataset(&cfg).unwrap().summary.sha256,
            data.summary.sha256
        );
        let bow = bag_of_words(&data.dataset).unwrap();
        for i in 0..bow.rows() {
            let s: f64 = bow.row(i).iter().sum();
            assert!(s == 0.0 || (s - 1.0).abs() < 1e-12);
        }
    }
}
