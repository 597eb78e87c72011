#![allow(dead_code)]

use pixtune_core::embedding::{init_model, EmbeddingModel};
use pixtune_core::graph::{TripartiteGraph, VertexId, VertexKind};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// `songs` songs and `images` images spread over `keywords` keywords.
pub fn star_graph(songs: usize, images: usize, keywords: usize) -> TripartiteGraph {
    let mut g = TripartiteGraph::new();
    for s in 0..songs {
        let k = format!("k{}", s % keywords);
        g.add_edge_by_key((VertexKind::Song, &format!("s{s}")), (VertexKind::Keyword, &k), 1.0 + (s % 3) as f64)
            .unwrap();
    }
    for i in 0..images {
        let k = format!("k{}", i % keywords);
        g.add_edge_by_key((VertexKind::Image, &format!("i{i}")), (VertexKind::Keyword, &k), 1.0)
            .unwrap();
    }
    g
}

/// A model over `graph` whose vertex and context vectors are uniform in [-1, 1].
pub fn random_model(graph: &TripartiteGraph, dim: usize, seed: u64) -> EmbeddingModel {
    let mut m = init_model(graph, dim, seed).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xA5A5);
    for i in 0..m.len() {
        for x in m.vertex_vector_mut(VertexId(i)) {
            *x = rng.random_range(-1.0..1.0);
        }
        for x in m.context_vector_mut(VertexId(i)) {
            *x = rng.random_range(-1.0..1.0);
        }
    }
    m
}

pub fn model_bits(m: &EmbeddingModel) -> Vec<u64> {
    m.vertex_matrix()
        .iter()
        .chain(m.context_matrix())
        .map(|x| x.to_bits())
        .collect()
}
