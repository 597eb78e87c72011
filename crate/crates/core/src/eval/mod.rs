//! Ground truth, metrics, and baselines for image-to-song retrieval.

mod baselines;
mod groundtruth;
mod metrics;
mod synth;

pub use baselines::{
    km_baseline, load_popularity, pop_baseline, popular_pool, read_popularity, PopularityTable, POP_POOL,
};
pub use groundtruth::{
    expand, is_relevant, join_queries, load_expansions, read_expansion_rows, read_expansions,
    read_query_rows, ExpansionRows, GroundTruth, Query, QuerySet,
};
pub use metrics::{hit_rate_at_k, precision_at_k, HitRateMode};
pub use synth::{
    cluster_separation, files, generate_synthetic_corpus, ClusterSeparation, SynthConfig, SyntheticCorpus,
};
