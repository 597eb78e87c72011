use super::groundtruth::{GroundTruth, Query};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum HitRateMode {
    /// Fraction of queries with at least one relevant song in the top k.
    #[default]
    PerQuery,
    /// Fraction of all recommended top-k songs that are relevant, pooled
    /// over queries.
    PerSong,
}

/// Hit rate of `recommender` over `queries`, judged against each query's
/// keyword. Only the first `k` songs of each list count.
pub fn hit_rate_at_k<F>(
    queries: &[Query],
    mut recommender: F,
    ground_truth: &GroundTruth,
    k: usize,
    mode: HitRateMode,
) -> Result<f64>
where
    F: FnMut(usize, &Query) -> Result<Vec<String>>,
{
    if queries.is_empty() {
        return Err(Error::InvalidInput("query set is empty".into()));
    }
    if k == 0 {
        return Err(Error::InvalidInput("k must be at least 1".into()));
    }
    let (mut hits, mut relevant, mut recommended) = (0usize, 0usize, 0usize);
    for (i, q) in queries.iter().enumerate() {
        let songs = recommender(i, q)?;
        let mut any = false;
        for song in songs.iter().take(k) {
            recommended += 1;
            if ground_truth.is_relevant(song, &q.keyword)? {
                relevant += 1;
                any = true;
            }
        }
        hits += usize::from(any);
    }
    Ok(match mode {
        HitRateMode::PerQuery => hits as f64 / queries.len() as f64,
        HitRateMode::PerSong if recommended == 0 => 0.0,
        HitRateMode::PerSong => relevant as f64 / recommended as f64,
    })
}

/// Mean over queries of `(relevant among the first k) / k`.
pub fn precision_at_k(lists: &[Vec<bool>], k: usize) -> Result<f64> {
    if k == 0 {
        return Err(Error::InvalidInput("k must be at least 1".into()));
    }
    if lists.is_empty() || lists.iter().any(Vec::is_empty) {
        return Err(Error::InvalidInput("every query needs at least one labeled item".into()));
    }
    let total: f64 = lists
        .iter()
        .map(|l| l.iter().take(k).filter(|&&r| r).count() as f64 / k as f64)
        .sum();
    Ok(total / lists.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::{BTreeMap, BTreeSet};

    fn fixture() -> (Vec<Query>, GroundTruth) {
        let mut exp = BTreeMap::new();
        exp.insert("snow".to_string(), BTreeSet::from(["snow".to_string()]));
        let lyrics: Vec<(String, Vec<String>)> = vec![
            ("hit".into(), vec!["snow".into()]),
            ("miss".into(), vec!["rain".into()]),
        ];
        let queries = (0..10)
            .map(|i| Query {
                image: format!("i{i}"),
                keyword: "snow".into(),
                feature: vec![],
            })
            .collect();
        (queries, GroundTruth::new(exp, &lyrics))
    }

    #[test]
    fn all_and_none() {
        let (q, gt) = fixture();
        let all = hit_rate_at_k(&q, |_, _| Ok(vec!["hit".into()]), &gt, 10, HitRateMode::PerQuery);
        assert_eq!(all.unwrap(), 1.0);
        let none = hit_rate_at_k(&q, |_, _| Ok(vec!["miss".into()]), &gt, 10, HitRateMode::PerQuery);
        assert_eq!(none.unwrap(), 0.0);
    }

    #[test]
    fn seven_of_ten() {
        let (q, gt) = fixture();
        // queries 0..7 get a relevant song at rank 3, the rest never do
        let rec = |i: usize, _: &Query| {
            let mut l = vec!["miss".to_string(); 5];
            if i < 7 {
                l[2] = "hit".into();
            }
            Ok(l)
        };
        assert_eq!(hit_rate_at_k(&q, rec, &gt, 10, HitRateMode::PerQuery).unwrap(), 0.7);
        // 7 relevant out of 50 recommended
        assert!((hit_rate_at_k(&q, rec, &gt, 10, HitRateMode::PerSong).unwrap() - 0.14).abs() < 1e-15);
        // hits sit at rank 3, so k=2 sees none
        assert_eq!(hit_rate_at_k(&q, rec, &gt, 2, HitRateMode::PerQuery).unwrap(), 0.0);
    }

    #[test]
    fn errors() {
        let (q, gt) = fixture();
        let rec = |_: usize, _: &Query| Ok(vec!["hit".to_string()]);
        assert!(hit_rate_at_k(&[], rec, &gt, 10, HitRateMode::PerQuery).is_err());
        assert!(hit_rate_at_k(&q, rec, &gt, 0, HitRateMode::PerQuery).is_err());
        let unknown = |_: usize, _: &Query| Ok(vec!["nope".to_string()]);
        assert!(matches!(
            hit_rate_at_k(&q, unknown, &gt, 10, HitRateMode::PerQuery),
            Err(Error::MissingSong(_))
        ));
    }

    #[test]
    fn precision_cases() {
        assert_eq!(precision_at_k(&[vec![true; 10]], 10).unwrap(), 1.0);
        let alt: Vec<bool> = (0..10).map(|i| i % 2 == 0).collect();
        assert_eq!(precision_at_k(&[alt], 10).unwrap(), 0.5);

        let make = |r: usize| (0..10).map(|i| i < r).collect::<Vec<_>>();
        let lists = vec![make(8), make(6), make(7), make(7)];
        assert!((precision_at_k(&lists, 10).unwrap() - 0.7).abs() < 1e-15);

        assert!(precision_at_k(&lists, 0).is_err());
        assert!(precision_at_k(&[vec![]], 10).is_err());
    }
}
