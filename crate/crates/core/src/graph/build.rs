use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct SongKeywordEdge {
    pub song: String,
    pub keyword: String,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ImageKeywordEdge {
    pub image: String,
    pub keyword: String,
    pub weight: f64,
}

/// One edge per (song, keyword) pair with at least one exact token match,
/// weighted by the number of occurrences. Songs matching no keyword emit
/// nothing and so never enter the graph.
///
/// Output follows the lyrics order, then keyword order within a song.
pub fn song_keyword_edges(
    lyrics: &[(String, Vec<String>)],
    keywords: &BTreeSet<String>,
) -> Result<Vec<SongKeywordEdge>> {
    if keywords.is_empty() {
        return Err(Error::InvalidInput("keyword set is empty".into()));
    }
    let mut out = Vec::new();
    for (song, tokens) in lyrics {
        let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
        for tok in tokens {
            if keywords.contains(tok) {
                *counts.entry(tok).or_default() += 1;
            }
        }
        out.extend(counts.into_iter().map(|(kw, c)| SongKeywordEdge {
            song: song.clone(),
            keyword: kw.to_owned(),
            weight: c as f64,
        }));
    }
    Ok(out)
}

/// One edge per manifest row; relevance defaults to 1.0.
pub fn image_keyword_edges(
    manifest: &[(String, String, Option<f64>)],
    keywords: &BTreeSet<String>,
) -> Result<Vec<ImageKeywordEdge>> {
    manifest
        .iter()
        .map(|(image, keyword, relevance)| {
            if !keywords.contains(keyword) {
                return Err(Error::UnresolvedReference(format!(
                    "keyword {keyword:?} (image {image:?})"
                )));
            }
            let weight = relevance.unwrap_or(1.0);
            if !(weight.is_finite() && weight > 0.0) {
                return Err(Error::InvalidWeight(weight));
            }
            Ok(ImageKeywordEdge {
                image: image.clone(),
                keyword: keyword.clone(),
                weight,
            })
        })
        .collect()
}
