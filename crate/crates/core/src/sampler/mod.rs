//! Weighted discrete sampling over the tripartite graph.
//!
//! Edges are drawn in proportion to their weight and oriented by a fair coin.
//! Negatives come from a per-kind noise distribution proportional to
//! `degree^exponent`.

mod alias;

use rand::Rng;

pub use alias::AliasTable;

use crate::error::{Error, Result};
use crate::graph::{TripartiteGraph, VertexId, VertexKind};

pub const DEFAULT_NOISE_EXPONENT: f64 = 0.75;

/// Redraws allowed when a negative collides with the positive target.
pub const MAX_NEGATIVE_ATTEMPTS: usize = 100;

pub fn build_alias_table(weights: &[f64]) -> Result<AliasTable> {
    AliasTable::new(weights)
}

pub fn sample_alias<R: Rng + ?Sized>(table: &AliasTable, rng: &mut R) -> usize {
    table.sample(rng)
}

/// Noise distribution over the vertices of a single kind.
#[derive(Debug, Clone)]
pub struct NoiseDistribution {
    kind: VertexKind,
    exponent: f64,
    support: Vec<VertexId>,
    table: AliasTable,
}

impl NoiseDistribution {
    /// `P(v) ∝ degree(v)^exponent` over vertices of `kind` with nonzero degree.
    pub fn new(graph: &TripartiteGraph, kind: VertexKind, exponent: f64) -> Result<Self> {
        if !exponent.is_finite() {
            return Err(Error::InvalidInput(format!("noise exponent {exponent}")));
        }
        let support: Vec<VertexId> = graph
            .vertices_of(kind)
            .map(|v| v.id)
            .filter(|&id| graph.degree(id) > 0.0)
            .collect();
        if support.is_empty() {
            return Err(Error::EmptySupport(format!("no {kind} vertex with positive degree")));
        }
        let weights: Vec<f64> = support
            .iter()
            .map(|&id| graph.degree(id).powf(exponent))
            .collect();
        let table = AliasTable::new(&weights)?;
        Ok(Self {
            kind,
            exponent,
            support,
            table,
        })
    }

    pub fn kind(&self) -> VertexKind {
        self.kind
    }

    pub fn exponent(&self) -> f64 {
        self.exponent
    }

    pub fn support(&self) -> &[VertexId] {
        &self.support
    }

    #[inline]
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> VertexId {
        self.support[self.table.sample(rng)]
    }

    /// Draws a vertex different from `exclude`, or `None` after
    /// [`MAX_NEGATIVE_ATTEMPTS`] collisions.
    pub fn sample_excluding<R: Rng + ?Sized>(&self, exclude: VertexId, rng: &mut R) -> Option<VertexId> {
        (0..MAX_NEGATIVE_ATTEMPTS)
            .map(|_| self.sample(rng))
            .find(|&v| v != exclude)
    }

    /// Analytic probability of drawing `v`; zero outside the support.
    pub fn probability(&self, v: VertexId) -> f64 {
        match self.support.iter().position(|&s| s == v) {
            Some(i) => self.table.effective_probabilities()[i],
            None => 0.0,
        }
    }
}

pub fn build_noise_distribution(
    graph: &TripartiteGraph,
    kind: VertexKind,
    exponent: f64,
) -> Result<NoiseDistribution> {
    NoiseDistribution::new(graph, kind, exponent)
}

/// Draws undirected edges in proportion to weight and orients each draw
/// uniformly at random.
#[derive(Debug, Clone)]
pub struct EdgeSampler {
    endpoints: Vec<(VertexId, VertexId)>,
    table: AliasTable,
}

impl EdgeSampler {
    pub fn new(graph: &TripartiteGraph) -> Result<Self> {
        if graph.edge_count() == 0 {
            return Err(Error::EmptySupport("graph has no edges".into()));
        }
        let weights: Vec<f64> = graph.edges().iter().map(|e| e.weight).collect();
        Ok(Self {
            endpoints: graph.edges().iter().map(|e| (e.a, e.b)).collect(),
            table: AliasTable::new(&weights)?,
        })
    }

    /// Returns a directed `(source, target)` pair.
    #[inline]
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> (VertexId, VertexId) {
        let (a, b) = self.endpoints[self.table.sample(rng)];
        if rng.random::<bool>() {
            (a, b)
        } else {
            (b, a)
        }
    }
}

pub fn sample_edge<R: Rng + ?Sized>(sampler: &EdgeSampler, rng: &mut R) -> (VertexId, VertexId) {
    sampler.sample(rng)
}
