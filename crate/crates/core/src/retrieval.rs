//! Image-to-song retrieval.
//!
//! A query image feature is matched against the feature store to find the
//! nearest known images; each of those images then pulls its nearest songs in
//! embedding space. The per-image song lists are fused into one ranked list.

use std::collections::HashSet;

use crate::embedding::EmbeddingModel;
use crate::error::{Error, Result};
use crate::features::FeatureStore;
use crate::graph::VertexKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RetrievalConfig {
    pub n_images: usize,
    pub songs_per_image: usize,
    pub final_k: usize,
}

impl Default for RetrievalConfig {
    fn default() -> Self {
        Self {
            n_images: 5,
            songs_per_image: 2,
            final_k: 10,
        }
    }
}

impl RetrievalConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_images == 0 || self.songs_per_image == 0 || self.final_k == 0 {
            return Err(Error::InvalidInput(
                "n_images, songs_per_image and final_k must all be at least 1".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Neighbor {
    pub id: String,
    pub distance: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Recommendation {
    pub song: String,
    /// Embedding distance between the song and its source image.
    pub distance: f64,
    pub source_image: String,
    /// 1-based rank of the source image in the image-retrieval stage.
    pub source_rank: usize,
}

pub type RecommendationList = Vec<Recommendation>;

pub fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Exact k nearest neighbors by Euclidean distance, ascending, ties broken by
/// ascending id.
pub fn knn<'a, I>(query: &[f64], corpus: I, k: usize) -> Result<Vec<Neighbor>>
where
    I: IntoIterator<Item = (&'a str, &'a [f64])>,
{
    if k == 0 {
        return Err(Error::InvalidInput("k must be at least 1".into()));
    }
    let mut scored = Vec::new();
    for (id, v) in corpus {
        if v.len() != query.len() {
            return Err(Error::InvalidInput(format!(
                "vector {id} has dimension {}, query has {}",
                v.len(),
                query.len()
            )));
        }
        scored.push((euclidean(query, v), id));
    }
    let cmp = |a: &(f64, &str), b: &(f64, &str)| a.0.total_cmp(&b.0).then_with(|| a.1.cmp(b.1));
    if scored.len() > k {
        scored.select_nth_unstable_by(k - 1, cmp);
        scored.truncate(k);
    }
    scored.sort_unstable_by(cmp);
    Ok(scored
        .into_iter()
        .map(|(distance, id)| Neighbor {
            id: id.to_owned(),
            distance,
        })
        .collect())
}

pub fn nearest_images(query: &[f64], store: &FeatureStore, n: usize) -> Result<Vec<Neighbor>> {
    if query.len() != store.dim() {
        return Err(Error::InvalidInput(format!(
            "query has dimension {}, feature store has {}",
            query.len(),
            store.dim()
        )));
    }
    knn(query, store.iter(), n)
}

/// Song vertex vectors of a model, gathered once for repeated queries.
#[derive(Debug, Clone)]
pub struct SongIndex<'m> {
    model: &'m EmbeddingModel,
    songs: Vec<(&'m str, &'m [f64])>,
}

impl<'m> SongIndex<'m> {
    pub fn new(model: &'m EmbeddingModel) -> Self {
        let songs = model
            .vertices()
            .iter()
            .enumerate()
            .filter(|(_, v)| v.kind == VertexKind::Song)
            .map(|(i, v)| {
                let id = crate::graph::VertexId(i);
                (v.external_id.as_str(), model.vertex_vector(id))
            })
            .collect();
        Self { model, songs }
    }

    pub fn len(&self) -> usize {
        self.songs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.songs.is_empty()
    }

    pub fn songs_for_image(&self, image: &str, m: usize) -> Result<Vec<Neighbor>> {
        let query = self
            .model
            .embedding(VertexKind::Image, image)
            .ok_or_else(|| Error::UnknownVertex(format!("image:{image}")))?;
        if self.songs.is_empty() {
            return Err(Error::EmptySupport("model has no song vertices".into()));
        }
        knn(query, self.songs.iter().copied(), m)
    }
}

pub fn songs_for_image(image: &str, model: &EmbeddingModel, m: usize) -> Result<Vec<Neighbor>> {
    SongIndex::new(model).songs_for_image(image, m)
}

/// The full cascade with precomputed song vectors.
#[derive(Debug, Clone)]
pub struct Recommender<'a> {
    store: &'a FeatureStore,
    songs: SongIndex<'a>,
    config: RetrievalConfig,
}

impl<'a> Recommender<'a> {
    pub fn new(store: &'a FeatureStore, model: &'a EmbeddingModel, config: RetrievalConfig) -> Result<Self> {
        config.validate()?;
        if store.is_empty() {
            return Err(Error::EmptySupport("feature store is empty".into()));
        }
        let songs = SongIndex::new(model);
        if songs.is_empty() {
            return Err(Error::EmptySupport("model has no song vertices".into()));
        }
        Ok(Self { store, songs, config })
    }

    pub fn config(&self) -> &RetrievalConfig {
        &self.config
    }

    /// Fuses per-image song lists in (image rank, song rank) order, keeping
    /// the first occurrence of each song. A shortfall is filled from the
    /// next-nearest songs of image 1, then image 2, and so on.
    pub fn recommend(&self, query: &[f64]) -> Result<RecommendationList> {
        let cfg = &self.config;
        let images = nearest_images(query, self.store, cfg.n_images)?;

        // long enough to cover the extension walk after skipping duplicates
        let depth = cfg.songs_per_image + 2 * cfg.final_k;
        let ranked: Vec<Vec<Neighbor>> = images
            .iter()
            .map(|img| self.songs.songs_for_image(&img.id, depth))
            .collect::<Result<_>>()?;

        let mut seen = HashSet::new();
        let mut out = Vec::with_capacity(cfg.final_k);
        let mut push = |out: &mut RecommendationList, rank: usize, song: &Neighbor| {
            if out.len() < cfg.final_k && seen.insert(song.id.clone()) {
                out.push(Recommendation {
                    song: song.id.clone(),
                    distance: song.distance,
                    source_image: images[rank].id.clone(),
                    source_rank: rank + 1,
                });
            }
        };
        for (rank, songs) in ranked.iter().enumerate() {
            for song in songs.iter().take(cfg.songs_per_image) {
                push(&mut out, rank, song);
            }
        }
        for (rank, songs) in ranked.iter().enumerate() {
            for song in songs.iter().skip(cfg.songs_per_image) {
                push(&mut out, rank, song);
            }
        }
        Ok(out)
    }
}

pub fn recommend(
    query: &[f64],
    store: &FeatureStore,
    model: &EmbeddingModel,
    config: RetrievalConfig,
) -> Result<RecommendationList> {
    Recommender::new(store, model, config)?.recommend(query)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn corpus() -> Vec<(String, Vec<f64>)> {
        vec![
            ("a".into(), vec![0.0, 0.0]),
            ("b".into(), vec![3.0, 4.0]),
            ("c".into(), vec![1.0, 0.0]),
        ]
    }

    fn view(c: &[(String, Vec<f64>)]) -> impl Iterator<Item = (&str, &[f64])> {
        c.iter().map(|(k, v)| (k.as_str(), v.as_slice()))
    }

    #[test]
    fn hand_distances() {
        let c = corpus();
        let r = knn(&[0.0, 0.0], view(&c), 2).unwrap();
        assert_eq!(
            r,
            vec![
                Neighbor { id: "a".into(), distance: 0.0 },
                Neighbor { id: "c".into(), distance: 1.0 }
            ]
        );
        let all = knn(&[0.0, 0.0], view(&c), 10).unwrap();
        assert_eq!(all.len(), 3);
        assert_eq!(all[2].distance, 5.0);
    }

    #[test]
    fn identity_query_first() {
        let c = corpus();
        let r = knn(&[3.0, 4.0], view(&c), 1).unwrap();
        assert_eq!(r[0].id, "b");
        assert_eq!(r[0].distance, 0.0);
    }

    #[test]
    fn ties_by_id() {
        let c = vec![
            ("z".to_string(), vec![1.0]),
            ("m".to_string(), vec![-1.0]),
            ("a".to_string(), vec![1.0]),
        ];
        let r = knn(&[0.0], view(&c), 3).unwrap();
        let ids: Vec<_> = r.iter().map(|n| n.id.as_str()).collect();
        assert_eq!(ids, vec!["a", "m", "z"]);
        let r = knn(&[0.0], view(&c), 2).unwrap();
        assert_eq!(r.iter().map(|n| n.id.as_str()).collect::<Vec<_>>(), vec!["a", "m"]);
    }

    #[test]
    fn errors_and_empty() {
        let c = corpus();
        assert!(matches!(knn(&[0.0], view(&c), 1), Err(Error::InvalidInput(_))));
        assert!(matches!(knn(&[0.0, 0.0], view(&c), 0), Err(Error::InvalidInput(_))));
        assert!(knn(&[0.0], std::iter::empty(), 3).unwrap().is_empty());
    }
}
