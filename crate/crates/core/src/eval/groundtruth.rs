use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use crate::error::{Error, Result};
use crate::features::FeatureStore;
use crate::graph::io::data_lines;

/// Relevance-ordered expansion rows: keyword -> similar words.
pub type ExpansionRows = BTreeMap<String, Vec<String>>;

/// Reads `keyword<TAB>word1,word2,...` rows, preserving word order.
pub fn read_expansion_rows<R: BufRead>(reader: R) -> Result<ExpansionRows> {
    let mut out = ExpansionRows::new();
    for item in data_lines(reader) {
        let (n, line) = item?;
        let (kw, words) = line.split_once('\t').unwrap_or((line.as_str(), ""));
        if kw.is_empty() {
            return Err(Error::Parse("empty keyword".into()).at_line(n));
        }
        let words = words
            .split(',')
            .map(str::trim)
            .filter(|w| !w.is_empty())
            .map(str::to_owned)
            .collect();
        if out.insert(kw.to_owned(), words).is_some() {
            return Err(Error::DuplicateKey(kw.to_owned()).at_line(n));
        }
    }
    Ok(out)
}

/// Keeps the first `n` similar words per keyword and adds the keyword itself.
pub fn expand(rows: &ExpansionRows, n: usize) -> BTreeMap<String, BTreeSet<String>> {
    rows.iter()
        .map(|(kw, words)| {
            let mut set: BTreeSet<String> = words.iter().take(n).cloned().collect();
            set.insert(kw.clone());
            (kw.clone(), set)
        })
        .collect()
}

pub fn read_expansions<R: BufRead>(reader: R, n: usize) -> Result<BTreeMap<String, BTreeSet<String>>> {
    Ok(expand(&read_expansion_rows(reader)?, n))
}

pub fn load_expansions(path: impl AsRef<Path>, n: usize) -> Result<BTreeMap<String, BTreeSet<String>>> {
    read_expansions(BufReader::new(File::open(path)?), n)
}

#[derive(Debug, Clone, Default)]
pub struct GroundTruth {
    expansion: BTreeMap<String, BTreeSet<String>>,
    song_tokens: HashMap<String, HashSet<String>>,
}

impl GroundTruth {
    pub fn new(
        expansion: BTreeMap<String, BTreeSet<String>>,
        lyrics: &[(String, Vec<String>)],
    ) -> Self {
        let song_tokens = lyrics
            .iter()
            .map(|(s, toks)| (s.clone(), toks.iter().cloned().collect()))
            .collect();
        Self {
            expansion,
            song_tokens,
        }
    }

    pub fn expansion(&self, keyword: &str) -> Result<&BTreeSet<String>> {
        self.expansion
            .get(keyword)
            .ok_or_else(|| Error::MissingKeyword(keyword.to_owned()))
    }

    pub fn song_tokens(&self, song: &str) -> Result<&HashSet<String>> {
        self.song_tokens
            .get(song)
            .ok_or_else(|| Error::MissingSong(song.to_owned()))
    }

    /// True when the song's lyrics share a word with the keyword's expansion.
    pub fn is_relevant(&self, song: &str, keyword: &str) -> Result<bool> {
        let tokens = self.song_tokens(song)?;
        let expansion = self.expansion(keyword)?;
        Ok(expansion.iter().any(|w| tokens.contains(w)))
    }
}

pub fn is_relevant(song: &str, keyword: &str, ground_truth: &GroundTruth) -> Result<bool> {
    ground_truth.is_relevant(song, keyword)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Query {
    pub image: String,
    pub keyword: String,
    pub feature: Vec<f64>,
}

pub type QuerySet = Vec<Query>;

/// Query file rows: `image_id<TAB>keyword`.
pub fn read_query_rows<R: BufRead>(reader: R) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for item in data_lines(reader) {
        let (n, line) = item?;
        match line.split('\t').collect::<Vec<_>>().as_slice() {
            [img, kw] if !img.is_empty() && !kw.is_empty() => {
                out.push(((*img).to_owned(), (*kw).to_owned()))
            }
            _ => return Err(Error::Parse("expected image_id<TAB>keyword".into()).at_line(n)),
        }
    }
    Ok(out)
}

/// Attaches stored features to query rows.
pub fn join_queries(rows: &[(String, String)], store: &FeatureStore) -> Result<QuerySet> {
    rows.iter()
        .map(|(image, keyword)| {
            let feature = store
                .get(image)
                .ok_or_else(|| Error::UnresolvedReference(format!("feature for image {image}")))?;
            Ok(Query {
                image: image.clone(),
                keyword: keyword.clone(),
                feature: feature.to_vec(),
            })
        })
        .collect()
}
