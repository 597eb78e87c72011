use std::cmp::Reverse;
use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::io::data_lines;
use crate::graph::{TripartiteGraph, VertexKind};

/// Size of the popular pool the POP baseline draws from.
pub const POP_POOL: usize = 100;

/// Song id -> play count.
pub type PopularityTable = BTreeMap<String, u64>;

/// Popularity file rows: `song_id<TAB>play_count`.
pub fn read_popularity<R: BufRead>(reader: R) -> Result<PopularityTable> {
    let mut out = PopularityTable::new();
    for item in data_lines(reader) {
        let (n, line) = item?;
        let (song, count) = line
            .split_once('\t')
            .ok_or_else(|| Error::Parse("expected song_id<TAB>play_count".into()).at_line(n))?;
        let count: u64 = count
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad play count {count:?}")).at_line(n))?;
        if out.insert(song.to_owned(), count).is_some() {
            return Err(Error::DuplicateKey(song.to_owned()).at_line(n));
        }
    }
    Ok(out)
}

pub fn load_popularity(path: impl AsRef<Path>) -> Result<PopularityTable> {
    read_popularity(BufReader::new(File::open(path)?))
}

/// Keyword matching: songs adjacent to `keyword`, strongest edge first, ties
/// by ascending song id.
pub fn km_baseline(keyword: &str, graph: &TripartiteGraph, k: usize) -> Result<Vec<String>> {
    let kw = graph
        .find(VertexKind::Keyword, keyword)
        .ok_or_else(|| Error::UnknownVertex(format!("keyword:{keyword}")))?;
    let vertices = graph.vertices();
    let mut songs: Vec<(f64, &str)> = graph
        .neighbors(kw)
        .filter(|(n, _)| vertices[n.0].kind == VertexKind::Song)
        .map(|(n, w)| (w, vertices[n.0].external_id.as_str()))
        .collect();
    songs.sort_by(|a, b| b.0.total_cmp(&a.0).then_with(|| a.1.cmp(b.1)));
    Ok(songs.into_iter().take(k).map(|(_, s)| s.to_owned()).collect())
}

/// The `POP_POOL` most-played songs, ties by ascending id.
pub fn popular_pool(popularity: &PopularityTable) -> Vec<&str> {
    let mut songs: Vec<(&str, u64)> = popularity.iter().map(|(s, &c)| (s.as_str(), c)).collect();
    songs.sort_by_key(|&(s, c)| (Reverse(c), s));
    songs.into_iter().take(POP_POOL).map(|(s, _)| s).collect()
}

/// `k` songs drawn uniformly without replacement from the popular pool.
pub fn pop_baseline(popularity: &PopularityTable, k: usize, seed: u64) -> Vec<String> {
    let pool = popular_pool(popularity);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rand::seq::index::sample(&mut rng, pool.len(), k.min(pool.len()))
        .into_iter()
        .map(|i| pool[i].to_owned())
        .collect()
}
