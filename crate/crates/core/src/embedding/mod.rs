//! Vertex representations learned from neighborhood proximity.
//!
//! Each vertex owns a vertex vector and a context vector. Under second-order
//! proximity the score of a directed pair `(u, v)` is
//! `vertex[u] · context[v]`; first-order scores `vertex[u] · vertex[v]`.
//! Retrieval only ever reads vertex vectors.

mod io;
mod train;

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub use io::{load_model, read_model, save_model, write_model, ModelFormat};
pub use train::{mean_positive_loss, train, train_with_stats, TrainConfig, TrainStats};

use crate::error::{Error, Result};
use crate::graph::{TripartiteGraph, VertexId, VertexKind};

pub const SIGMOID_CLAMP: f64 = 30.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Proximity {
    First,
    #[default]
    Second,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Label {
    Positive,
    Negative,
}

impl Label {
    fn target(self) -> f64 {
        match self {
            Label::Positive => 1.0,
            Label::Negative => 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct VertexKey {
    pub kind: VertexKind,
    pub external_id: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingModel {
    dim: usize,
    vertices: Vec<VertexKey>,
    lookup: HashMap<(VertexKind, String), VertexId>,
    vertex_vectors: Vec<f64>,
    context_vectors: Vec<f64>,
}

impl EmbeddingModel {
    pub(crate) fn from_parts(
        dim: usize,
        vertices: Vec<VertexKey>,
        vertex_vectors: Vec<f64>,
        context_vectors: Vec<f64>,
    ) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidInput("embedding dimension must be positive".into()));
        }
        let n = vertices.len();
        if vertex_vectors.len() != n * dim || context_vectors.len() != n * dim {
            return Err(Error::InvalidInput("matrix shape does not match vertex table".into()));
        }
        let mut lookup = HashMap::with_capacity(n);
        for (i, v) in vertices.iter().enumerate() {
            if lookup
                .insert((v.kind, v.external_id.clone()), VertexId(i))
                .is_some()
            {
                return Err(Error::DuplicateKey(format!("{}:{}", v.kind, v.external_id)));
            }
        }
        Ok(Self {
            dim,
            vertices,
            lookup,
            vertex_vectors,
            context_vectors,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn vertices(&self) -> &[VertexKey] {
        &self.vertices
    }

    pub fn find(&self, kind: VertexKind, external_id: &str) -> Option<VertexId> {
        self.lookup.get(&(kind, external_id.to_owned())).copied()
    }

    pub fn vertex_vector(&self, id: VertexId) -> &[f64] {
        &self.vertex_vectors[id.0 * self.dim..(id.0 + 1) * self.dim]
    }

    pub fn context_vector(&self, id: VertexId) -> &[f64] {
        &self.context_vectors[id.0 * self.dim..(id.0 + 1) * self.dim]
    }

    pub fn vertex_vector_mut(&mut self, id: VertexId) -> &mut [f64] {
        &mut self.vertex_vectors[id.0 * self.dim..(id.0 + 1) * self.dim]
    }

    pub fn context_vector_mut(&mut self, id: VertexId) -> &mut [f64] {
        &mut self.context_vectors[id.0 * self.dim..(id.0 + 1) * self.dim]
    }

    /// Vertex vector by key.
    pub fn embedding(&self, kind: VertexKind, external_id: &str) -> Option<&[f64]> {
        self.find(kind, external_id).map(|id| self.vertex_vector(id))
    }

    pub fn vertex_matrix(&self) -> &[f64] {
        &self.vertex_vectors
    }

    pub fn context_matrix(&self) -> &[f64] {
        &self.context_vectors
    }

    pub fn is_finite(&self) -> bool {
        self.vertex_vectors
            .iter()
            .chain(&self.context_vectors)
            .all(|x| x.is_finite())
    }
}

/// Vertex vectors i.i.d. uniform in `[-0.5/d, 0.5/d]`, context vectors zero.
pub fn init_model(graph: &TripartiteGraph, dim: usize, seed: u64) -> Result<EmbeddingModel> {
    if dim == 0 {
        return Err(Error::InvalidInput("embedding dimension must be positive".into()));
    }
    if graph.is_empty() {
        return Err(Error::EmptySupport("graph has no vertices".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = graph.vertex_count();
    let half = 0.5 / dim as f64;
    let vertex_vectors = (0..n * dim)
        .map(|_| rng.random_range(-half..=half))
        .collect();
    let vertices = graph
        .vertices()
        .iter()
        .map(|v| VertexKey {
            kind: v.kind,
            external_id: v.external_id.clone(),
        })
        .collect();
    EmbeddingModel::from_parts(dim, vertices, vertex_vectors, vec![0.0; n * dim])
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub fn sigmoid(x: f64) -> f64 {
    let x = x.clamp(-SIGMOID_CLAMP, SIGMOID_CLAMP);
    1.0 / (1.0 + (-x).exp())
}

/// Second-order score `vertex[u] · context[v]`.
pub fn pair_score(model: &EmbeddingModel, u: VertexId, v: VertexId) -> f64 {
    dot(model.vertex_vector(u), model.context_vector(v))
}

/// Negative log-likelihood of `label` given score `s`.
pub fn edge_loss(s: f64, label: Label) -> f64 {
    let s = s.clamp(-SIGMOID_CLAMP, SIGMOID_CLAMP);
    match label {
        // -ln σ(s) = ln(1 + e^{-s})
        Label::Positive => (-s).exp().ln_1p(),
        Label::Negative => s.exp().ln_1p(),
    }
}

/// Derivative of [`edge_loss`] with respect to the score.
#[inline]
pub fn loss_slope(s: f64, label: Label) -> f64 {
    sigmoid(s) - label.target()
}

/// Gradients of `edge_loss(pair_score(u, v), label)` with respect to u's
/// vertex vector and v's context vector.
pub fn step_gradient(
    model: &EmbeddingModel,
    u: VertexId,
    v: VertexId,
    label: Label,
) -> (Vec<f64>, Vec<f64>) {
    let g = loss_slope(pair_score(model, u, v), label);
    let grad_u = model.context_vector(v).iter().map(|c| g * c).collect();
    let grad_ctx = model.vertex_vector(u).iter().map(|x| g * x).collect();
    (grad_u, grad_ctx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn tiny_graph() -> TripartiteGraph {
        let mut g = TripartiteGraph::new();
        g.add_edge_by_key((VertexKind::Song, "s1"), (VertexKind::Keyword, "snow"), 1.0)
            .unwrap();
        g.add_edge_by_key((VertexKind::Image, "i1"), (VertexKind::Keyword, "snow"), 1.0)
            .unwrap();
        g
    }

    #[test]
    fn init_ranges_and_zero_context() {
        let m = init_model(&tiny_graph(), 4, 1).unwrap();
        assert!(m.vertex_matrix().iter().all(|x| (-0.125..=0.125).contains(x)));
        assert!(m.context_matrix().iter().all(|&x| x == 0.0));
        assert_eq!(m.len(), 3);
    }

    #[test]
    fn init_deterministic() {
        let g = tiny_graph();
        let a = init_model(&g, 8, 99).unwrap();
        let b = init_model(&g, 8, 99).unwrap();
        let bits = |m: &EmbeddingModel| m.vertex_matrix().iter().map(|x| x.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&a), bits(&b));
        assert_ne!(bits(&a), bits(&init_model(&g, 8, 100).unwrap()));
    }

    #[test]
    fn init_rejects_zero_dim_and_empty_graph() {
        assert!(matches!(init_model(&tiny_graph(), 0, 1), Err(Error::InvalidInput(_))));
        assert!(init_model(&TripartiteGraph::new(), 4, 1).is_err());
    }

    #[test]
    fn fresh_scores_are_zero() {
        let m = init_model(&tiny_graph(), 4, 1).unwrap();
        for u in 0..3 {
            for v in 0..3 {
                assert_eq!(pair_score(&m, VertexId(u), VertexId(v)), 0.0);
            }
        }
    }

    #[test]
    fn hand_inner_product() {
        let mut m = init_model(&tiny_graph(), 2, 1).unwrap();
        m.vertex_vector_mut(VertexId(0)).copy_from_slice(&[1.0, 2.0]);
        m.context_vector_mut(VertexId(1)).copy_from_slice(&[3.0, -1.0]);
        assert_eq!(pair_score(&m, VertexId(0), VertexId(1)), 1.0);
    }

    #[test]
    #[allow(clippy::approx_constant)]
    fn loss_values() {
        assert_abs_diff_eq!(edge_loss(0.0, Label::Positive), 0.693147, epsilon = 1e-6);
        assert_abs_diff_eq!(edge_loss(0.0, Label::Negative), std::f64::consts::LN_2, epsilon = 1e-15);
        // σ(2) = 1/(1+e^-2) = 0.8807970779778823
        let expected = -(1.0f64 / (1.0 + (-2.0f64).exp())).ln();
        assert_abs_diff_eq!(edge_loss(2.0, Label::Positive), expected, epsilon = 1e-12);
        assert_abs_diff_eq!(edge_loss(2.0, Label::Positive), 0.126928, epsilon = 1e-6);
    }

    #[test]
    fn loss_clamped() {
        assert_eq!(edge_loss(1e6, Label::Negative), edge_loss(30.0, Label::Negative));
        assert!(edge_loss(-1e300, Label::Positive).is_finite());
        assert_eq!(sigmoid(1e9), sigmoid(30.0));
    }

    #[test]
    fn gradient_zero_context() {
        let m = init_model(&tiny_graph(), 4, 3).unwrap();
        for label in [Label::Positive, Label::Negative] {
            let (gu, _) = step_gradient(&m, VertexId(0), VertexId(1), label);
            assert!(gu.iter().all(|&x| x == 0.0));
        }
    }

    #[test]
    fn gradient_at_zero_score() {
        let mut m = init_model(&tiny_graph(), 2, 1).unwrap();
        m.vertex_vector_mut(VertexId(0)).copy_from_slice(&[1.0, 1.0]);
        m.context_vector_mut(VertexId(1)).copy_from_slice(&[2.0, -2.0]);
        let (gu, gc) = step_gradient(&m, VertexId(0), VertexId(1), Label::Positive);
        assert_eq!(gu, vec![-1.0, 1.0]);
        assert_eq!(gc, vec![-0.5, -0.5]);
    }
}
