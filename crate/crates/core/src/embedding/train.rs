//! Edge-sampling SGD with negative sampling.
//!
//! Each iteration draws a directed edge `u -> v`, scores it against `v` and
//! `K` negatives of `v`'s kind, pushes the targets' vectors immediately and
//! applies the accumulated update to `u` once at the end.
//!
//! With more than one worker the parameter matrices are shared and updated
//! without locks. Each cell is an `AtomicU64` holding `f64` bits, accessed
//! with relaxed loads and stores, so concurrent writers may drop each other's
//! updates but never tear a value.

use std::sync::atomic::{AtomicU64, Ordering};
use std::thread;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{dot, edge_loss, init_model, sigmoid, EmbeddingModel, Label, Proximity};
use crate::error::{Error, Result};
use crate::graph::{TripartiteGraph, VertexId, VertexKind};
use crate::sampler::{EdgeSampler, NoiseDistribution, DEFAULT_NOISE_EXPONENT};

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub dim: usize,
    pub negatives: usize,
    pub learning_rate: f64,
    pub samples: u64,
    pub noise_exponent: f64,
    pub workers: usize,
    pub seed: u64,
    pub proximity: Proximity,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            dim: 128,
            negatives: 5,
            learning_rate: 0.025,
            samples: 0,
            noise_exponent: DEFAULT_NOISE_EXPONENT,
            workers: 1,
            seed: 42,
            proximity: Proximity::Second,
        }
    }
}

impl TrainConfig {
    pub fn with_samples(samples: u64) -> Self {
        Self {
            samples,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidInput(msg.to_owned()));
        if self.dim == 0 {
            return bad("dim must be at least 1");
        }
        if self.negatives == 0 {
            return bad("negatives must be at least 1");
        }
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return bad("learning rate must be positive");
        }
        if self.samples == 0 {
            return bad("samples must be at least 1");
        }
        if !self.noise_exponent.is_finite() {
            return bad("noise exponent must be finite");
        }
        if self.workers == 0 {
            return bad("workers must be at least 1");
        }
        Ok(())
    }

    /// Linear decay with a floor of `1e-4` of the initial rate.
    pub fn learning_rate_at(&self, t: u64) -> f64 {
        let rho0 = self.learning_rate;
        (rho0 * (1.0 - t as f64 / self.samples as f64)).max(rho0 * 1e-4)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct TrainStats {
    pub iterations: u64,
    pub positive_updates: u64,
    pub negative_updates: u64,
    /// Negatives abandoned after repeated collisions with the true target.
    pub skipped_negatives: u64,
}

impl std::ops::AddAssign for TrainStats {
    fn add_assign(&mut self, o: Self) {
        self.iterations += o.iterations;
        self.positive_updates += o.positive_updates;
        self.negative_updates += o.negative_updates;
        self.skipped_negatives += o.skipped_negatives;
    }
}

pub fn train(graph: &TripartiteGraph, config: &TrainConfig) -> Result<EmbeddingModel> {
    train_with_stats(graph, config).map(|(m, _)| m)
}

pub fn train_with_stats(
    graph: &TripartiteGraph,
    config: &TrainConfig,
) -> Result<(EmbeddingModel, TrainStats)> {
    config.validate()?;
    let edges = EdgeSampler::new(graph)?;
    let mut model = init_model(graph, config.dim, config.seed)?;

    // one noise table per kind that ever appears as an edge target
    let mut noise: [Option<NoiseDistribution>; 3] = [None, None, None];
    for kind in VertexKind::ALL {
        if graph.vertices_of(kind).any(|v| graph.degree(v.id) > 0.0) {
            noise[kind_slot(kind)] = Some(NoiseDistribution::new(graph, kind, config.noise_exponent)?);
        }
    }
    let kinds: Vec<VertexKind> = graph.vertices().iter().map(|v| v.kind).collect();

    let vertex = SharedMatrix::new(model.vertex_matrix(), config.dim);
    let context = SharedMatrix::new(model.context_matrix(), config.dim);
    let job = Job {
        config,
        edges: &edges,
        noise: &noise,
        kinds: &kinds,
        vertex: &vertex,
        context: &context,
    };

    let stats = if config.workers == 1 {
        job.run(0)
    } else {
        thread::scope(|s| {
            let handles: Vec<_> = (0..config.workers)
                .map(|w| {
                    let job = &job;
                    s.spawn(move || job.run(w))
                })
                .collect();
            let mut total = TrainStats::default();
            for h in handles {
                total += h.join().expect("training worker panicked");
            }
            total
        })
    };

    vertex.copy_into(model.vertex_vector_mut_all());
    context.copy_into(model.context_vector_mut_all());
    if !model.is_finite() {
        return Err(Error::Diverged(format!(
            "non-finite parameters after {} samples at learning rate {}",
            stats.iterations, config.learning_rate
        )));
    }
    Ok((model, stats))
}

/// Mean loss over both orientations of every edge in `graph`.
pub fn mean_positive_loss(
    graph: &TripartiteGraph,
    model: &EmbeddingModel,
    proximity: Proximity,
) -> Result<f64> {
    if graph.edge_count() == 0 {
        return Err(Error::EmptySupport("graph has no edges".into()));
    }
    let resolve = |id: VertexId| -> Result<VertexId> {
        let v = graph.vertex(id)?;
        model
            .find(v.kind, &v.external_id)
            .ok_or_else(|| Error::UnknownVertex(format!("{}:{}", v.kind, v.external_id)))
    };
    let score = |u: VertexId, v: VertexId| match proximity {
        Proximity::Second => dot(model.vertex_vector(u), model.context_vector(v)),
        Proximity::First => dot(model.vertex_vector(u), model.vertex_vector(v)),
    };
    let mut total = 0.0;
    for e in graph.edges() {
        let (a, b) = (resolve(e.a)?, resolve(e.b)?);
        total += edge_loss(score(a, b), Label::Positive) + edge_loss(score(b, a), Label::Positive);
    }
    Ok(total / (2 * graph.edge_count()) as f64)
}

fn kind_slot(kind: VertexKind) -> usize {
    match kind {
        VertexKind::Image => 0,
        VertexKind::Keyword => 1,
        VertexKind::Song => 2,
    }
}

impl EmbeddingModel {
    fn vertex_vector_mut_all(&mut self) -> &mut [f64] {
        &mut self.vertex_vectors
    }

    fn context_vector_mut_all(&mut self) -> &mut [f64] {
        &mut self.context_vectors
    }
}

struct SharedMatrix {
    cells: Vec<AtomicU64>,
    dim: usize,
}

impl SharedMatrix {
    fn new(values: &[f64], dim: usize) -> Self {
        Self {
            cells: values.iter().map(|x| AtomicU64::new(x.to_bits())).collect(),
            dim,
        }
    }

    #[inline]
    fn read_row(&self, row: VertexId, out: &mut [f64]) {
        let cells = &self.cells[row.0 * self.dim..(row.0 + 1) * self.dim];
        for (o, c) in out.iter_mut().zip(cells) {
            *o = f64::from_bits(c.load(Ordering::Relaxed));
        }
    }

    /// `row += scale * delta`
    #[inline]
    fn add_row(&self, row: VertexId, delta: &[f64], scale: f64) {
        let cells = &self.cells[row.0 * self.dim..(row.0 + 1) * self.dim];
        for (c, d) in cells.iter().zip(delta) {
            let x = f64::from_bits(c.load(Ordering::Relaxed)) + scale * d;
            c.store(x.to_bits(), Ordering::Relaxed);
        }
    }

    fn copy_into(&self, out: &mut [f64]) {
        for (o, c) in out.iter_mut().zip(&self.cells) {
            *o = f64::from_bits(c.load(Ordering::Relaxed));
        }
    }
}

struct Job<'a> {
    config: &'a TrainConfig,
    edges: &'a EdgeSampler,
    noise: &'a [Option<NoiseDistribution>; 3],
    kinds: &'a [VertexKind],
    vertex: &'a SharedMatrix,
    context: &'a SharedMatrix,
}

impl Job<'_> {
    fn run(&self, worker: usize) -> TrainStats {
        let cfg = self.config;
        let workers = cfg.workers as u64;
        let w = worker as u64;
        // iterations w, w + workers, w + 2*workers, ... of the global schedule
        let iters = cfg.samples / workers + u64::from(w < cfg.samples % workers);

        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(1));
        rng.set_stream(w);

        let targets = match cfg.proximity {
            Proximity::Second => self.context,
            Proximity::First => self.vertex,
        };
        let mut src = vec![0.0; cfg.dim];
        let mut tgt = vec![0.0; cfg.dim];
        let mut grad = vec![0.0; cfg.dim];
        let mut stats = TrainStats::default();

        for i in 0..iters {
            let lr = cfg.learning_rate_at(i * workers + w);
            let (u, v) = self.edges.sample(&mut rng);
            self.vertex.read_row(u, &mut src);
            grad.iter_mut().for_each(|g| *g = 0.0);

            let mut update = |t: VertexId, label: Label, grad: &mut [f64]| {
                targets.read_row(t, &mut tgt);
                let g = sigmoid(dot(&src, &tgt)) - label.target();
                for (gi, ti) in grad.iter_mut().zip(&tgt) {
                    *gi += g * ti;
                }
                targets.add_row(t, &src, -lr * g);
            };

            update(v, Label::Positive, &mut grad);
            stats.positive_updates += 1;

            let noise = self.noise[kind_slot(self.kinds[v.0])]
                .as_ref()
                .expect("target kind has a noise table");
            for _ in 0..cfg.negatives {
                match noise.sample_excluding(v, &mut rng) {
                    Some(n) => {
                        update(n, Label::Negative, &mut grad);
                        stats.negative_updates += 1;
                    }
                    None => stats.skipped_negatives += 1,
                }
            }
            self.vertex.add_row(u, &grad, -lr);
            stats.iterations += 1;
        }
        stats
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn graph_two_songs() -> TripartiteGraph {
        let mut g = TripartiteGraph::new();
        for (s, k, w) in [("s1", "snow", 2.0), ("s2", "sky", 1.0), ("s1", "sky", 1.0)] {
            g.add_edge_by_key((VertexKind::Song, s), (VertexKind::Keyword, k), w)
                .unwrap();
        }
        g.add_edge_by_key((VertexKind::Image, "i1"), (VertexKind::Keyword, "snow"), 1.0)
            .unwrap();
        g
    }

    #[test]
    fn rejects_bad_config() {
        let g = graph_two_songs();
        for cfg in [
            TrainConfig::with_samples(0),
            TrainConfig { dim: 0, ..TrainConfig::with_samples(10) },
            TrainConfig { negatives: 0, ..TrainConfig::with_samples(10) },
            TrainConfig { learning_rate: 0.0, ..TrainConfig::with_samples(10) },
            TrainConfig { workers: 0, ..TrainConfig::with_samples(10) },
        ] {
            assert!(matches!(train(&g, &cfg), Err(Error::InvalidInput(_))));
        }
    }

    #[test]
    fn empty_graph_is_empty_support() {
        let mut g = TripartiteGraph::new();
        g.add_vertex(VertexKind::Song, "lonely").unwrap();
        let err = train(&g, &TrainConfig::with_samples(10)).unwrap_err();
        assert!(matches!(err, Error::EmptySupport(_)));
    }

    #[test]
    fn one_sample_one_negative_accounting() {
        let g = graph_two_songs();
        let cfg = TrainConfig {
            dim: 4,
            negatives: 1,
            ..TrainConfig::with_samples(1)
        };
        let (_, stats) = train_with_stats(&g, &cfg).unwrap();
        assert_eq!(stats.iterations, 1);
        assert_eq!(stats.positive_updates, 1);
        assert_eq!(stats.negative_updates + stats.skipped_negatives, 1);
    }

    #[test]
    fn learning_rate_schedule() {
        let cfg = TrainConfig {
            learning_rate: 0.1,
            ..TrainConfig::with_samples(100)
        };
        assert_eq!(cfg.learning_rate_at(0), 0.1);
        assert!((cfg.learning_rate_at(50) - 0.05).abs() < 1e-15);
        assert_eq!(cfg.learning_rate_at(100), 0.1 * 1e-4);
        assert_eq!(cfg.learning_rate_at(1000), 0.1 * 1e-4);
    }

    #[test]
    fn single_worker_bit_identical() {
        let g = graph_two_songs();
        let cfg = TrainConfig {
            dim: 8,
            seed: 3,
            ..TrainConfig::with_samples(5_000)
        };
        let a = train(&g, &cfg).unwrap();
        let b = train(&g, &cfg).unwrap();
        let bits = |m: &EmbeddingModel| {
            m.vertex_matrix()
                .iter()
                .chain(m.context_matrix())
                .map(|x| x.to_bits())
                .collect::<Vec<_>>()
        };
        assert_eq!(bits(&a), bits(&b));
    }

    #[test]
    fn multi_worker_stays_finite_and_counts_all_samples() {
        let g = graph_two_songs();
        let cfg = TrainConfig {
            dim: 8,
            workers: 4,
            ..TrainConfig::with_samples(10_001)
        };
        let (m, stats) = train_with_stats(&g, &cfg).unwrap();
        assert!(m.is_finite());
        assert_eq!(stats.iterations, 10_001);
    }

    #[test]
    fn first_order_trains() {
        let g = graph_two_songs();
        let cfg = TrainConfig {
            dim: 8,
            proximity: Proximity::First,
            ..TrainConfig::with_samples(2_000)
        };
        let m = train(&g, &cfg).unwrap();
        assert!(m.is_finite());
        assert!(m.context_matrix().iter().all(|&x| x == 0.0));
    }
}
