//! Clustered synthetic corpus for end-to-end runs.
//!
//! Cluster `c` owns keywords `c{c}_kw{j}`. Each song and image links with
//! weight 1 to between one and three of its own cluster's keywords. Image
//! features are the cluster centroid plus isotropic Gaussian noise. The
//! expansion of a keyword is the rest of its cluster's keywords.

use std::collections::{BTreeSet, HashMap};
use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::baselines::PopularityTable;
use super::groundtruth::{expand, join_queries, ExpansionRows, GroundTruth, QuerySet};
use crate::embedding::EmbeddingModel;
use crate::error::{Error, Result};
use crate::features::{write_features, FeatureStore};
use crate::graph::{image_keyword_edges, song_keyword_edges, TripartiteGraph, VertexKind};
use crate::retrieval::euclidean;

const FILLER: [&str; 8] = ["la", "oh", "baby", "tonight", "heart", "yeah", "love", "away"];

#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub clusters: usize,
    pub songs_per_cluster: usize,
    pub images_per_cluster: usize,
    pub keywords_per_cluster: usize,
    pub feature_dim: usize,
    /// Standard deviation of the per-component feature noise.
    pub noise: f64,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            clusters: 4,
            songs_per_cluster: 50,
            images_per_cluster: 50,
            keywords_per_cluster: 5,
            feature_dim: 32,
            noise: 0.1,
            seed: 42,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SyntheticCorpus {
    pub keywords: BTreeSet<String>,
    pub lyrics: Vec<(String, Vec<String>)>,
    pub manifest: Vec<(String, String, Option<f64>)>,
    pub graph: TripartiteGraph,
    pub features: FeatureStore,
    pub centroids: Vec<Vec<f64>>,
    /// (image, keyword) query rows; every image queries with its first keyword.
    pub query_rows: Vec<(String, String)>,
    pub queries: QuerySet,
    pub expansions: ExpansionRows,
    pub ground_truth: GroundTruth,
    pub popularity: PopularityTable,
    /// Cluster index of every song and image id.
    pub cluster_of: HashMap<String, usize>,
}

pub fn generate_synthetic_corpus(cfg: &SynthConfig) -> Result<SyntheticCorpus> {
    if cfg.clusters == 0
        || cfg.songs_per_cluster == 0
        || cfg.images_per_cluster == 0
        || cfg.keywords_per_cluster == 0
        || cfg.feature_dim == 0
    {
        return Err(Error::InvalidInput("synthetic corpus counts must be at least 1".into()));
    }
    if !(cfg.noise.is_finite() && cfg.noise >= 0.0) {
        return Err(Error::InvalidInput(format!("noise must be nonnegative, got {}", cfg.noise)));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let noise = Normal::new(0.0, cfg.noise).map_err(|e| Error::InvalidInput(e.to_string()))?;
    let max_links = cfg.keywords_per_cluster.min(3);

    let cluster_keywords: Vec<Vec<String>> = (0..cfg.clusters)
        .map(|c| (0..cfg.keywords_per_cluster).map(|j| format!("c{c}_kw{j}")).collect())
        .collect();
    let keywords: BTreeSet<String> = cluster_keywords.iter().flatten().cloned().collect();

    let pick_keywords = |rng: &mut ChaCha8Rng, c: usize| -> Vec<String> {
        let count = rng.random_range(1..=max_links);
        sample(rng, cfg.keywords_per_cluster, count)
            .into_iter()
            .map(|j| cluster_keywords[c][j].clone())
            .collect()
    };

    let mut cluster_of = HashMap::new();
    let mut lyrics = Vec::new();
    for c in 0..cfg.clusters {
        for s in 0..cfg.songs_per_cluster {
            let id = format!("c{c}_song{s:03}");
            let mut tokens = pick_keywords(&mut rng, c);
            for _ in 0..rng.random_range(2..6) {
                tokens.push(FILLER[rng.random_range(0..FILLER.len())].to_owned());
            }
            cluster_of.insert(id.clone(), c);
            lyrics.push((id, tokens));
        }
    }

    let centroids: Vec<Vec<f64>> = (0..cfg.clusters)
        .map(|_| (0..cfg.feature_dim).map(|_| rng.random::<f64>()).collect())
        .collect();
    let mut features = FeatureStore::new(cfg.feature_dim)?;
    let mut manifest = Vec::new();
    let mut query_rows = Vec::new();
    for (c, centroid) in centroids.iter().enumerate() {
        for i in 0..cfg.images_per_cluster {
            let id = format!("c{c}_img{i:03}");
            let kws = pick_keywords(&mut rng, c);
            query_rows.push((id.clone(), kws[0].clone()));
            manifest.extend(kws.into_iter().map(|k| (id.clone(), k, None)));
            let feature = centroid
                .iter()
                .map(|&m| if cfg.noise == 0.0 { m } else { m + noise.sample(&mut rng) })
                .collect();
            features.insert(&id, feature)?;
            cluster_of.insert(id, c);
        }
    }

    let song_edges = song_keyword_edges(&lyrics, &keywords)?;
    let image_edges = image_keyword_edges(&manifest, &keywords)?;
    let graph = TripartiteGraph::from_corpus(&song_edges, &image_edges)?;

    let expansions: ExpansionRows = cluster_keywords
        .iter()
        .flat_map(|kws| {
            kws.iter().map(move |k| {
                let others = kws.iter().filter(|o| *o != k).cloned().collect();
                (k.clone(), others)
            })
        })
        .collect();
    let ground_truth = GroundTruth::new(expand(&expansions, cfg.keywords_per_cluster), &lyrics);
    let queries = join_queries(&query_rows, &features)?;

    let popularity = lyrics
        .iter()
        .map(|(s, _)| (s.clone(), rng.random_range(0..100_000u64)))
        .collect();

    Ok(SyntheticCorpus {
        keywords,
        lyrics,
        manifest,
        graph,
        features,
        centroids,
        query_rows,
        queries,
        expansions,
        ground_truth,
        popularity,
        cluster_of,
    })
}

/// File names written by [`SyntheticCorpus::write_files`].
pub mod files {
    pub const KEYWORDS: &str = "keywords.txt";
    pub const LYRICS: &str = "lyrics.tsv";
    pub const MANIFEST: &str = "images.tsv";
    pub const FEATURES: &str = "features.txt";
    pub const QUERIES: &str = "queries.tsv";
    pub const EXPANSIONS: &str = "expansions.tsv";
    pub const POPULARITY: &str = "popularity.tsv";
}

impl SyntheticCorpus {
    /// Materializes the corpus inputs (not the graph) under `dir`.
    pub fn write_files(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        fs::create_dir_all(dir)?;
        let open = |name: &str| -> Result<BufWriter<fs::File>> {
            Ok(BufWriter::new(fs::File::create(dir.join(name))?))
        };

        let mut w = open(files::KEYWORDS)?;
        for k in &self.keywords {
            writeln!(w, "{k}")?;
        }
        w.flush()?;

        let mut w = open(files::LYRICS)?;
        for (s, toks) in &self.lyrics {
            writeln!(w, "{s}\t{}", toks.join(" "))?;
        }
        w.flush()?;

        let mut w = open(files::MANIFEST)?;
        for (img, kw, _) in &self.manifest {
            writeln!(w, "{img}\t{kw}")?;
        }
        w.flush()?;

        let mut w = open(files::FEATURES)?;
        write_features(&self.features, &mut w)?;
        w.flush()?;

        let mut w = open(files::QUERIES)?;
        for (img, kw) in &self.query_rows {
            writeln!(w, "{img}\t{kw}")?;
        }
        w.flush()?;

        let mut w = open(files::EXPANSIONS)?;
        for (k, words) in &self.expansions {
            writeln!(w, "{k}\t{}", words.join(","))?;
        }
        w.flush()?;

        let mut w = open(files::POPULARITY)?;
        for (s, c) in &self.popularity {
            writeln!(w, "{s}\t{c}")?;
        }
        w.flush()?;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClusterSeparation {
    pub intra: f64,
    pub inter: f64,
}

/// Mean embedding distance between image and song vertex vectors, split by
/// whether the pair shares a cluster.
pub fn cluster_separation(
    model: &EmbeddingModel,
    cluster_of: &HashMap<String, usize>,
) -> Result<ClusterSeparation> {
    let collect = |kind: VertexKind| -> Vec<(usize, &[f64])> {
        model
            .vertices()
            .iter()
            .filter(|v| v.kind == kind)
            .filter_map(|v| {
                let c = *cluster_of.get(&v.external_id)?;
                Some((c, model.embedding(kind, &v.external_id)?))
            })
            .collect()
    };
    let images = collect(VertexKind::Image);
    let songs = collect(VertexKind::Song);
    let (mut intra, mut n_intra, mut inter, mut n_inter) = (0.0, 0usize, 0.0, 0usize);
    for (ci, iv) in &images {
        for (cs, sv) in &songs {
            let d = euclidean(iv, sv);
            if ci == cs {
                intra += d;
                n_intra += 1;
            } else {
                inter += d;
                n_inter += 1;
            }
        }
    }
    if n_intra == 0 || n_inter == 0 {
        return Err(Error::EmptySupport("need both intra- and inter-cluster pairs".into()));
    }
    Ok(ClusterSeparation {
        intra: intra / n_intra as f64,
        inter: inter / n_inter as f64,
    })
}
