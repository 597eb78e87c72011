//! The heterogeneous tripartite network of images, keywords, and songs.
//!
//! Edges only ever join a keyword to a song or a keyword to an image. The
//! graph is undirected at rest; the sampler introduces direction when it
//! expands each edge into its two orientations.

mod build;
pub(crate) mod io;

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

pub use build::{image_keyword_edges, song_keyword_edges, ImageKeywordEdge, SongKeywordEdge};
pub use io::{
    load_edges, read_edges, read_keywords, read_lyrics, read_manifest, save_edges, write_edges,
};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum VertexKind {
    Image,
    Keyword,
    Song,
}

impl VertexKind {
    pub const ALL: [VertexKind; 3] = [VertexKind::Image, VertexKind::Keyword, VertexKind::Song];

    pub fn as_str(self) -> &'static str {
        match self {
            VertexKind::Image => "image",
            VertexKind::Keyword => "keyword",
            VertexKind::Song => "song",
        }
    }

    /// Whether an edge between `self` and `other` is allowed.
    pub fn can_link(self, other: VertexKind) -> bool {
        use VertexKind::*;
        matches!(
            (self, other),
            (Song, Keyword) | (Keyword, Song) | (Image, Keyword) | (Keyword, Image)
        )
    }

    pub(crate) fn to_byte(self) -> u8 {
        match self {
            VertexKind::Image => 0,
            VertexKind::Keyword => 1,
            VertexKind::Song => 2,
        }
    }

    pub(crate) fn from_byte(b: u8) -> Option<Self> {
        match b {
            0 => Some(VertexKind::Image),
            1 => Some(VertexKind::Keyword),
            2 => Some(VertexKind::Song),
            _ => None,
        }
    }
}

impl fmt::Display for VertexKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for VertexKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "image" => Ok(VertexKind::Image),
            "keyword" => Ok(VertexKind::Keyword),
            "song" => Ok(VertexKind::Song),
            other => Err(Error::Parse(format!("unknown vertex kind {other:?}"))),
        }
    }
}

/// Dense vertex handle, contiguous from 0 in insertion order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VertexId(pub usize);

impl VertexId {
    #[inline]
    pub fn index(self) -> usize {
        self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EdgeId(pub usize);

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Vertex {
    pub id: VertexId,
    pub kind: VertexKind,
    pub external_id: String,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub a: VertexId,
    pub b: VertexId,
    pub weight: f64,
}

#[derive(Debug, Clone, Default)]
pub struct TripartiteGraph {
    vertices: Vec<Vertex>,
    lookup: HashMap<(VertexKind, String), VertexId>,
    edges: Vec<Edge>,
    pair_index: HashMap<(VertexId, VertexId), EdgeId>,
    // (neighbor, edge) per vertex
    adjacency: Vec<Vec<(VertexId, EdgeId)>>,
    degree: Vec<f64>,
}

impl PartialEq for TripartiteGraph {
    fn eq(&self, other: &Self) -> bool {
        self.vertices == other.vertices && self.edges == other.edges
    }
}

impl TripartiteGraph {
    pub fn new() -> Self {
        Self::default()
    }

    /// Returns the id of `(kind, external_id)`, inserting it if absent.
    pub fn add_vertex(&mut self, kind: VertexKind, external_id: &str) -> Result<VertexId> {
        if external_id.is_empty() {
            return Err(Error::InvalidInput("empty external id".into()));
        }
        if let Some(&id) = self.lookup.get(&(kind, external_id.to_owned())) {
            return Ok(id);
        }
        let id = VertexId(self.vertices.len());
        self.vertices.push(Vertex {
            id,
            kind,
            external_id: external_id.to_owned(),
        });
        self.lookup.insert((kind, external_id.to_owned()), id);
        self.adjacency.push(Vec::new());
        self.degree.push(0.0);
        Ok(id)
    }

    /// Adds an undirected edge. Adding an existing pair again accumulates weight.
    pub fn add_edge(&mut self, a: VertexId, b: VertexId, weight: f64) -> Result<EdgeId> {
        let ka = self.vertex(a)?.kind;
        let kb = self.vertex(b)?.kind;
        if !ka.can_link(kb) {
            return Err(Error::KindViolation {
                a_kind: ka,
                a_id: self.vertices[a.0].external_id.clone(),
                b_kind: kb,
                b_id: self.vertices[b.0].external_id.clone(),
            });
        }
        if !(weight.is_finite() && weight > 0.0) {
            return Err(Error::InvalidWeight(weight));
        }
        let key = if a <= b { (a, b) } else { (b, a) };
        let id = match self.pair_index.get(&key) {
            Some(&id) => {
                self.edges[id.0].weight += weight;
                id
            }
            None => {
                let id = EdgeId(self.edges.len());
                self.edges.push(Edge { a, b, weight });
                self.pair_index.insert(key, id);
                self.adjacency[a.0].push((b, id));
                self.adjacency[b.0].push((a, id));
                id
            }
        };
        self.degree[a.0] += weight;
        self.degree[b.0] += weight;
        Ok(id)
    }

    /// Convenience wrapper: resolves (or creates) both endpoints by key.
    pub fn add_edge_by_key(
        &mut self,
        a: (VertexKind, &str),
        b: (VertexKind, &str),
        weight: f64,
    ) -> Result<EdgeId> {
        if !a.0.can_link(b.0) {
            return Err(Error::KindViolation {
                a_kind: a.0,
                a_id: a.1.to_owned(),
                b_kind: b.0,
                b_id: b.1.to_owned(),
            });
        }
        if !(weight.is_finite() && weight > 0.0) {
            return Err(Error::InvalidWeight(weight));
        }
        let a = self.add_vertex(a.0, a.1)?;
        let b = self.add_vertex(b.0, b.1)?;
        self.add_edge(a, b, weight)
    }

    /// Builds a graph from corpus-derived edges. Vertices are created in the
    /// order they first appear in the edge stream, so an edge TSV written by
    /// [`save_edges`] reloads with identical ids.
    pub fn from_corpus(songs: &[SongKeywordEdge], images: &[ImageKeywordEdge]) -> Result<Self> {
        let mut g = Self::new();
        for e in songs {
            g.add_edge_by_key(
                (VertexKind::Song, &e.song),
                (VertexKind::Keyword, &e.keyword),
                e.weight,
            )?;
        }
        for e in images {
            g.add_edge_by_key(
                (VertexKind::Image, &e.image),
                (VertexKind::Keyword, &e.keyword),
                e.weight,
            )?;
        }
        Ok(g)
    }

    pub fn vertex(&self, id: VertexId) -> Result<&Vertex> {
        self.vertices
            .get(id.0)
            .ok_or_else(|| Error::UnknownVertex(format!("#{}", id.0)))
    }

    pub fn find(&self, kind: VertexKind, external_id: &str) -> Option<VertexId> {
        self.lookup.get(&(kind, external_id.to_owned())).copied()
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn vertices_of(&self, kind: VertexKind) -> impl Iterator<Item = &Vertex> {
        self.vertices.iter().filter(move |v| v.kind == kind)
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// Cached weighted degree.
    pub fn degree(&self, id: VertexId) -> f64 {
        self.degree[id.0]
    }

    /// Neighbors of `id` with the weight of the connecting edge.
    pub fn neighbors(&self, id: VertexId) -> impl Iterator<Item = (VertexId, f64)> + '_ {
        self.adjacency[id.0]
            .iter()
            .map(|&(n, e)| (n, self.edges[e.0].weight))
    }

    pub fn edge_weight(&self, a: VertexId, b: VertexId) -> Option<f64> {
        let key = if a <= b { (a, b) } else { (b, a) };
        self.pair_index.get(&key).map(|e| self.edges[e.0].weight)
    }

    /// Number of vertices and edges per kind, for reporting.
    pub fn summary(&self) -> GraphSummary {
        let mut s = GraphSummary::default();
        for v in &self.vertices {
            match v.kind {
                VertexKind::Image => s.images += 1,
                VertexKind::Keyword => s.keywords += 1,
                VertexKind::Song => s.songs += 1,
            }
        }
        for e in &self.edges {
            let other = match self.vertices[e.a.0].kind {
                VertexKind::Keyword => self.vertices[e.b.0].kind,
                k => k,
            };
            match other {
                VertexKind::Song => s.song_keyword_edges += 1,
                _ => s.image_keyword_edges += 1,
            }
        }
        s
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct GraphSummary {
    pub images: usize,
    pub keywords: usize,
    pub songs: usize,
    pub song_keyword_edges: usize,
    pub image_keyword_edges: usize,
}

impl fmt::Display for GraphSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "vertices: image={} keyword={} song={}\nedges: song-keyword={} image-keyword={}",
            self.images, self.keywords, self.songs, self.song_keyword_edges, self.image_keyword_edges
        )
    }
}
