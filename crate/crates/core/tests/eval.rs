use std::collections::{BTreeMap, BTreeSet};

use pixtune_core::eval::{
    expand, generate_synthetic_corpus, hit_rate_at_k, km_baseline, pop_baseline, popular_pool, ExpansionRows,
    GroundTruth, HitRateMode, PopularityTable, Query, SynthConfig, POP_POOL,
};
use pixtune_core::graph::{TripartiteGraph, VertexKind};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn queries(keywords: &[&str]) -> Vec<Query> {
    keywords
        .iter()
        .enumerate()
        .map(|(i, k)| Query { image: format!("q{i}"), keyword: k.to_string(), feature: vec![0.0] })
        .collect()
}

proptest! {
    #[test]
    fn per_query_hit_rate_never_drops_as_k_grows(
        relevant in prop::collection::vec(prop::collection::vec(any::<bool>(), 1..15), 1..20),
        k in 1usize..15,
    ) {
        // song "r{j}" is relevant, "n{j}" is not
        let mut exp = BTreeMap::new();
        exp.insert("kw".to_string(), BTreeSet::from(["kw".to_string()]));
        let lyrics: Vec<(String, Vec<String>)> = (0..15)
            .flat_map(|j| [(format!("r{j}"), vec!["kw".to_string()]), (format!("n{j}"), vec!["x".to_string()])])
            .collect();
        let gt = GroundTruth::new(exp, &lyrics);
        let lists: Vec<Vec<String>> = relevant
            .iter()
            .map(|l| l.iter().enumerate().map(|(j, &r)| format!("{}{j}", if r { "r" } else { "n" })).collect())
            .collect();
        let qs = queries(&vec!["kw"; lists.len()]);
        let rate = |k| hit_rate_at_k(&qs, |i, _| Ok(lists[i].clone()), &gt, k, HitRateMode::PerQuery).unwrap();
        let (a, b) = (rate(k), rate(k + 1));
        prop_assert!(a <= b);
        prop_assert!((0.0..=1.0).contains(&a));
    }
}

#[test]
fn unbounded_expansion_makes_every_sharing_song_relevant() {
    // each song shares one word with the keyword's full similar-word list
    let mut rows = ExpansionRows::new();
    let words: Vec<String> = (0..30).map(|i| format!("w{i}")).collect();
    rows.insert("kw".into(), words.clone());
    let lyrics: Vec<(String, Vec<String>)> =
        words.iter().enumerate().map(|(i, w)| (format!("s{i}"), vec![w.clone(), "filler".into()])).collect();
    let gt = GroundTruth::new(expand(&rows, usize::MAX), &lyrics);
    let qs = queries(&["kw"; 6]);
    for mode in [HitRateMode::PerQuery, HitRateMode::PerSong] {
        let rate = hit_rate_at_k(
            &qs,
            |i, _| Ok((0..5).map(|j| format!("s{}", i * 5 + j)).collect()),
            &gt,
            5,
            mode,
        )
        .unwrap();
        assert_eq!(rate, 1.0);
    }
    // truncating to zero similar words leaves only the keyword itself
    let gt0 = GroundTruth::new(expand(&rows, 0), &lyrics);
    let rate = hit_rate_at_k(&qs, |_, _| Ok(vec!["s0".into()]), &gt0, 1, HitRateMode::PerQuery).unwrap();
    assert_eq!(rate, 0.0);
}

#[test]
fn km_returns_adjacent_songs_in_weight_order() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut g = TripartiteGraph::new();
    for s in 0..80 {
        for k in 0..6 {
            if rng.random_bool(0.3) {
                let w = f64::from(rng.random_range(1..5u32));
                g.add_edge_by_key((VertexKind::Song, &format!("s{s:02}")), (VertexKind::Keyword, &format!("k{k}")), w)
                    .unwrap();
            }
        }
    }
    for i in 0..10 {
        g.add_edge_by_key((VertexKind::Image, &format!("i{i}")), (VertexKind::Keyword, "k0"), 50.0).unwrap();
    }
    for k in 0..6 {
        let kw = format!("k{k}");
        // oracle: scan every edge
        let mut expect: Vec<(f64, String)> = g
            .edges()
            .iter()
            .filter_map(|e| {
                let (a, b) = (g.vertex(e.a).unwrap(), g.vertex(e.b).unwrap());
                let (song, other) = if a.kind == VertexKind::Song { (a, b) } else { (b, a) };
                (song.kind == VertexKind::Song && other.external_id == kw).then(|| (e.weight, song.external_id.clone()))
            })
            .collect();
        expect.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap().then(a.1.cmp(&b.1)));
        let expect: Vec<String> = expect.into_iter().take(10).map(|(_, s)| s).collect();
        assert_eq!(km_baseline(&kw, &g, 10).unwrap(), expect);
    }
    assert!(km_baseline("absent", &g, 10).is_err());
}

#[test]
fn pop_draws_only_from_the_popular_pool() {
    let table: PopularityTable = (0..200).map(|i| (format!("s{i:03}"), (i * 7 % 200) as u64)).collect();
    let pool: BTreeSet<&str> = popular_pool(&table).into_iter().collect();
    assert_eq!(pool.len(), POP_POOL);
    let cutoff = table.values().copied().collect::<Vec<_>>();
    let mut sorted = cutoff.clone();
    sorted.sort_unstable_by(|a, b| b.cmp(a));
    let min_pool = sorted[POP_POOL - 1];
    assert!(pool.iter().all(|s| table[*s] >= min_pool));

    for seed in 0..10_000 {
        let picks = pop_baseline(&table, 10, seed);
        assert_eq!(picks.len(), 10);
        assert_eq!(picks.iter().collect::<BTreeSet<_>>().len(), 10);
        assert!(picks.iter().all(|s| pool.contains(s.as_str())));
    }
    assert_eq!(pop_baseline(&table, 10, 4), pop_baseline(&table, 10, 4));
}

#[test]
fn synthetic_corpus_is_reproducible_and_consistent() {
    let cfg = SynthConfig { clusters: 3, songs_per_cluster: 12, images_per_cluster: 8, ..SynthConfig::default() };
    let a = generate_synthetic_corpus(&cfg).unwrap();
    let b = generate_synthetic_corpus(&cfg).unwrap();
    assert_eq!(a.graph, b.graph);
    assert_eq!(a.lyrics, b.lyrics);
    assert_eq!(a.queries, b.queries);

    assert_eq!(a.graph.vertices_of(VertexKind::Song).count(), 36);
    assert_eq!(a.graph.vertices_of(VertexKind::Image).count(), 24);
    assert_eq!(a.features.len(), 24);
    // every edge stays inside one cluster
    for e in a.graph.edges() {
        let (x, y) = (a.graph.vertex(e.a).unwrap(), a.graph.vertex(e.b).unwrap());
        let prefix = |id: &str| id.split('_').next().unwrap().to_owned();
        assert_eq!(prefix(&x.external_id), prefix(&y.external_id));
    }
}
