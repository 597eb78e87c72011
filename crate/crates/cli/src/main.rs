//! `pixtune`: build the tripartite network, train embeddings, query, and
//! evaluate image-to-song retrieval.
//!
//! Exit codes: 0 success, 1 usage, 2 input or parse failure, 3 runtime failure.

mod conceptnet;

use std::collections::BTreeSet;
use std::fmt::Display;
use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use walkdir::WalkDir;

use pixtune_core::embedding::{self, mean_positive_loss, ModelFormat};
use pixtune_core::eval::{self, HitRateMode};
use pixtune_core::features::{self, histogram_extract, read_ppm, FeatureStore};
use pixtune_core::graph::{self, TripartiteGraph};
use pixtune_core::retrieval::{Recommender, RetrievalConfig};
use pixtune_core::{Error, Proximity, TrainConfig};

#[derive(Debug, Parser)]
#[command(name = "pixtune", version, about = "Image-based music recommendation via tripartite network embedding")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build the song/keyword/image edge list from a corpus
    BuildGraph(BuildGraphArgs),
    /// Learn vertex embeddings from an edge list
    Train(TrainArgs),
    /// Recommend songs for query image features
    Query(QueryArgs),
    /// Hit rate of the recommender or a baseline on a query set
    Evaluate(EvaluateArgs),
    /// Color-histogram features for a directory of PPM images
    ExtractFeatures(ExtractArgs),
    /// Write a clustered synthetic corpus
    GenSynth(GenSynthArgs),
    /// Download keyword expansions from the ConceptNet API
    FetchExpansions(FetchArgs),
}

#[derive(Debug, Args)]
struct BuildGraphArgs {
    /// `song_id<TAB>token token ...`
    #[arg(long)]
    lyrics: PathBuf,
    /// One keyword per line
    #[arg(long)]
    keywords: PathBuf,
    /// `image_id<TAB>keyword[<TAB>relevance]`
    #[arg(long)]
    images: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FormatArg {
    Bin,
    Text,
}

#[derive(Debug, Args)]
struct TrainArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 128, value_parser = clap::value_parser!(u64).range(1..))]
    dim: u64,
    #[arg(long, default_value_t = 5, value_parser = clap::value_parser!(u64).range(1..))]
    negatives: u64,
    #[arg(long, default_value_t = 0.025, value_parser = positive_real)]
    learning_rate: f64,
    /// Total edge samples
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    samples: u64,
    #[arg(long, default_value_t = 0.75)]
    noise_exponent: f64,
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    workers: u64,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Score pairs by vertex·vertex instead of vertex·context
    #[arg(long)]
    first_order: bool,
    /// Defaults to text for .txt/.tsv paths, binary otherwise
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
}

#[derive(Debug, Args)]
struct RetrievalArgs {
    #[arg(long, default_value_t = 5, value_parser = clap::value_parser!(u64).range(1..))]
    n_images: u64,
    #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u64).range(1..))]
    songs_per_image: u64,
    #[arg(long, default_value_t = 10, value_parser = clap::value_parser!(u64).range(1..))]
    k: u64,
}

impl RetrievalArgs {
    fn config(&self) -> RetrievalConfig {
        RetrievalConfig {
            n_images: self.n_images as usize,
            songs_per_image: self.songs_per_image as usize,
            final_k: self.k as usize,
        }
    }
}

#[derive(Debug, Args)]
struct QueryArgs {
    #[arg(long)]
    features: PathBuf,
    #[arg(long)]
    model: PathBuf,
    /// Feature file holding the query vector(s)
    #[arg(long)]
    image_feature_file: PathBuf,
    #[command(flatten)]
    retrieval: RetrievalArgs,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Baseline {
    Km,
    Pop,
}

#[derive(Debug, Args)]
struct EvaluateArgs {
    /// Edge list; needed by the km baseline
    #[arg(long)]
    graph: Option<PathBuf>,
    /// Trained model; needed unless a baseline is selected
    #[arg(long)]
    model: Option<PathBuf>,
    #[arg(long)]
    features: PathBuf,
    #[arg(long)]
    expansions: PathBuf,
    /// `image_id<TAB>keyword` rows
    #[arg(long)]
    queries: PathBuf,
    /// Song lyrics, the relevance token sets
    #[arg(long)]
    lyrics: PathBuf,
    /// `song_id<TAB>play_count`; needed by the pop baseline
    #[arg(long)]
    popularity: Option<PathBuf>,
    /// Expansion depth: similar words kept per keyword
    #[arg(long, default_value_t = 10)]
    n: usize,
    #[arg(long, default_value_t = 10, value_parser = clap::value_parser!(u64).range(1..))]
    k: u64,
    #[arg(long, value_enum)]
    baseline: Option<Baseline>,
    /// Report the fraction of relevant recommended songs instead of the
    /// fraction of queries with a hit
    #[arg(long)]
    per_song: bool,
    #[arg(long, default_value_t = 5, value_parser = clap::value_parser!(u64).range(1..))]
    n_images: u64,
    #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u64).range(1..))]
    songs_per_image: u64,
    #[arg(long, default_value_t = 42)]
    seed: u64,
}

#[derive(Debug, Args)]
struct ExtractArgs {
    #[arg(long)]
    input_dir: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 8, value_parser = clap::value_parser!(u64).range(1..=256))]
    bins: u64,
}

#[derive(Debug, Args)]
struct GenSynthArgs {
    #[arg(long)]
    out_dir: PathBuf,
    #[arg(long, default_value_t = 4, value_parser = clap::value_parser!(u64).range(1..))]
    clusters: u64,
    #[arg(long, default_value_t = 50, value_parser = clap::value_parser!(u64).range(1..))]
    songs_per_cluster: u64,
    #[arg(long, default_value_t = 50, value_parser = clap::value_parser!(u64).range(1..))]
    images_per_cluster: u64,
    #[arg(long, default_value_t = 5, value_parser = clap::value_parser!(u64).range(1..))]
    keywords_per_cluster: u64,
    #[arg(long, default_value_t = 32, value_parser = clap::value_parser!(u64).range(1..))]
    feature_dim: u64,
    #[arg(long, default_value_t = 0.1)]
    noise: f64,
    #[arg(long, default_value_t = 42)]
    seed: u64,
}

#[derive(Debug, Args)]
struct FetchArgs {
    #[arg(long)]
    keywords: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 20)]
    limit: usize,
    #[arg(long, default_value = "en")]
    lang: String,
    #[arg(long, default_value = conceptnet::DEFAULT_BASE_URL)]
    base_url: String,
}

fn positive_real(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(x) if x.is_finite() && x > 0.0 => Ok(x),
        _ => Err(format!("expected a positive number, got {s:?}")),
    }
}

const EXIT_USAGE: u8 = 1;
const EXIT_INPUT: u8 = 2;
const EXIT_RUNTIME: u8 = 3;

/// An error plus the exit code it maps to.
struct Failure {
    code: u8,
    error: anyhow::Error,
}

fn exit_code(e: &Error) -> u8 {
    match e.root() {
        Error::EmptySupport(_) | Error::UnknownVertex(_) | Error::Diverged(_) => EXIT_RUNTIME,
        _ => EXIT_INPUT,
    }
}

trait Context<T> {
    fn context(self, what: impl Display) -> Result<T, Failure>;
}

impl<T> Context<T> for pixtune_core::Result<T> {
    fn context(self, what: impl Display) -> Result<T, Failure> {
        self.map_err(|e| Failure {
            code: exit_code(&e),
            error: anyhow::Error::new(e).context(what.to_string()),
        })
    }
}

impl<T> Context<T> for io::Result<T> {
    fn context(self, what: impl Display) -> Result<T, Failure> {
        self.map_err(|e| Failure {
            code: EXIT_INPUT,
            error: anyhow::Error::new(e).context(what.to_string()),
        })
    }
}

fn usage(msg: impl Display) -> Failure {
    Failure {
        code: EXIT_USAGE,
        error: anyhow::anyhow!("{msg}"),
    }
}

fn open(path: &Path) -> Result<BufReader<File>, Failure> {
    File::open(path)
        .map(BufReader::new)
        .context(format!("opening {}", path.display()))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match cli.command {
        Command::BuildGraph(a) => build_graph(a),
        Command::Train(a) => train(a),
        Command::Query(a) => query(a),
        Command::Evaluate(a) => evaluate(a),
        Command::ExtractFeatures(a) => extract_features(a),
        Command::GenSynth(a) => gen_synth(a),
        Command::FetchExpansions(a) => fetch_expansions(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}

fn build_graph(a: BuildGraphArgs) -> Result<(), Failure> {
    let keywords = graph::read_keywords(open(&a.keywords)?).context(a.keywords.display())?;
    let lyrics = graph::read_lyrics(open(&a.lyrics)?).context(a.lyrics.display())?;
    let manifest = graph::read_manifest(open(&a.images)?).context(a.images.display())?;

    let song_edges = graph::song_keyword_edges(&lyrics, &keywords).context(a.keywords.display())?;
    let image_edges = graph::image_keyword_edges(&manifest, &keywords).context(a.images.display())?;
    let g = TripartiteGraph::from_corpus(&song_edges, &image_edges).context("building graph")?;
    graph::save_edges(&g, &a.out).context(format!("writing {}", a.out.display()))?;
    println!("{}", g.summary());
    Ok(())
}

fn train(a: TrainArgs) -> Result<(), Failure> {
    let g = graph::load_edges(&a.graph).context(a.graph.display())?;
    if g.edge_count() == 0 {
        return Err(Failure {
            code: EXIT_RUNTIME,
            error: anyhow::anyhow!("{} has no edges", a.graph.display()),
        });
    }
    let proximity = if a.first_order {
        Proximity::First
    } else {
        Proximity::Second
    };
    let config = TrainConfig {
        dim: a.dim as usize,
        negatives: a.negatives as usize,
        learning_rate: a.learning_rate,
        samples: a.samples,
        noise_exponent: a.noise_exponent,
        workers: a.workers as usize,
        seed: a.seed,
        proximity,
    };
    config.validate().map_err(usage)?;

    let initial = embedding::init_model(&g, config.dim, config.seed).context("initializing model")?;
    let initial_loss = mean_positive_loss(&g, &initial, proximity).context("scoring")?;
    eprintln!(
        "training: {} vertices, {} edges, dim={} negatives={} samples={} workers={}",
        g.vertex_count(),
        g.edge_count(),
        config.dim,
        config.negatives,
        config.samples,
        config.workers
    );
    eprintln!("initial mean positive-edge loss: {initial_loss:.6}");
    let (model, stats) = embedding::train_with_stats(&g, &config).context("training")?;
    let final_loss = mean_positive_loss(&g, &model, proximity).context("scoring")?;
    eprintln!(
        "iterations: {} (positive updates {}, negative updates {}, skipped negatives {})",
        stats.iterations, stats.positive_updates, stats.negative_updates, stats.skipped_negatives
    );
    eprintln!("final mean positive-edge loss: {final_loss:.6}");

    let format = match a.format {
        Some(FormatArg::Bin) => ModelFormat::Binary,
        Some(FormatArg::Text) => ModelFormat::Text,
        None => ModelFormat::from_path(&a.out),
    };
    embedding::save_model(&model, &a.out, format).context(format!("writing {}", a.out.display()))
}

fn query(a: QueryArgs) -> Result<(), Failure> {
    let store = features::load_features(&a.features).context(a.features.display())?;
    let model = embedding::load_model(&a.model).context(a.model.display())?;
    let queries = features::load_features(&a.image_feature_file).context(a.image_feature_file.display())?;
    if queries.dim() != store.dim() {
        return Err(Failure {
            code: EXIT_INPUT,
            error: anyhow::anyhow!(
                "query features have dimension {}, store has {}",
                queries.dim(),
                store.dim()
            ),
        });
    }
    let rec = Recommender::new(&store, &model, a.retrieval.config()).context("preparing retrieval")?;
    let stdout = io::stdout();
    let mut out = BufWriter::new(stdout.lock());
    let many = queries.len() > 1;
    for (id, q) in queries.iter() {
        let list = rec.recommend(q).context(format!("query {id}"))?;
        if many {
            writeln!(out, "# {id}").context("writing output")?;
        }
        for (i, r) in list.iter().enumerate() {
            writeln!(out, "{}\t{}\t{}\t{}", i + 1, r.song, r.distance, r.source_image)
                .context("writing output")?;
        }
    }
    out.flush().context("writing output")
}

fn evaluate(a: EvaluateArgs) -> Result<(), Failure> {
    let store = features::load_features(&a.features).context(a.features.display())?;
    let expansion = eval::load_expansions(&a.expansions, a.n).context(a.expansions.display())?;
    let lyrics = graph::read_lyrics(open(&a.lyrics)?).context(a.lyrics.display())?;
    let rows = eval::read_query_rows(open(&a.queries)?).context(a.queries.display())?;
    let queries = eval::join_queries(&rows, &store).context(a.queries.display())?;
    let truth = eval::GroundTruth::new(expansion, &lyrics);
    let k = a.k as usize;
    let mode = if a.per_song {
        HitRateMode::PerSong
    } else {
        HitRateMode::PerQuery
    };

    let rate = match a.baseline {
        Some(Baseline::Km) => {
            let path = a.graph.as_ref().ok_or_else(|| usage("--baseline km needs --graph"))?;
            let g = graph::load_edges(path).context(path.display())?;
            eval::hit_rate_at_k(&queries, |_, q| eval::km_baseline(&q.keyword, &g, k), &truth, k, mode)
        }
        Some(Baseline::Pop) => {
            let path = a
                .popularity
                .as_ref()
                .ok_or_else(|| usage("--baseline pop needs --popularity"))?;
            let pop = eval::load_popularity(path).context(path.display())?;
            let seed = a.seed;
            eval::hit_rate_at_k(
                &queries,
                |i, _| Ok(eval::pop_baseline(&pop, k, seed.wrapping_add(i as u64))),
                &truth,
                k,
                mode,
            )
        }
        None => {
            let path = a.model.as_ref().ok_or_else(|| usage("evaluate needs --model"))?;
            let model = embedding::load_model(path).context(path.display())?;
            let config = RetrievalConfig {
                n_images: a.n_images as usize,
                songs_per_image: a.songs_per_image as usize,
                final_k: k,
            };
            let rec = Recommender::new(&store, &model, config).context("preparing retrieval")?;
            eval::hit_rate_at_k(
                &queries,
                |_, q| Ok(rec.recommend(&q.feature)?.into_iter().map(|r| r.song).collect()),
                &truth,
                k,
                mode,
            )
        }
    }
    .context("evaluating")?;
    println!("hit_rate@{k}\t{rate:.6}");
    Ok(())
}

fn extract_features(a: ExtractArgs) -> Result<(), Failure> {
    let bins = a.bins as usize;
    let mut store = FeatureStore::new(3 * bins).context("feature store")?;
    let mut paths: Vec<PathBuf> = Vec::new();
    for entry in WalkDir::new(&a.input_dir) {
        let entry = entry.map_err(|e| Failure {
            code: EXIT_INPUT,
            error: anyhow::Error::new(e).context(format!("walking {}", a.input_dir.display())),
        })?;
        if entry.file_type().is_file()
            && entry.path().extension().is_some_and(|e| e.eq_ignore_ascii_case("ppm"))
        {
            paths.push(entry.into_path());
        }
    }
    paths.sort();
    for path in &paths {
        let id = path
            .file_stem()
            .and_then(|s| s.to_str())
            .ok_or_else(|| usage(format!("non-UTF-8 file name {}", path.display())))?;
        let img = read_ppm(open(path)?).context(path.display())?;
        let v = histogram_extract(&img.pixels, bins).context(path.display())?;
        store.insert(id, v).context(path.display())?;
    }
    features::save_features(&store, &a.out).context(format!("writing {}", a.out.display()))?;
    println!("{} images, dimension {}", store.len(), store.dim());
    Ok(())
}

fn gen_synth(a: GenSynthArgs) -> Result<(), Failure> {
    let cfg = eval::SynthConfig {
        clusters: a.clusters as usize,
        songs_per_cluster: a.songs_per_cluster as usize,
        images_per_cluster: a.images_per_cluster as usize,
        keywords_per_cluster: a.keywords_per_cluster as usize,
        feature_dim: a.feature_dim as usize,
        noise: a.noise,
        seed: a.seed,
    };
    let corpus = eval::generate_synthetic_corpus(&cfg).map_err(usage)?;
    corpus
        .write_files(&a.out_dir)
        .context(format!("writing {}", a.out_dir.display()))?;
    println!("{}", corpus.graph.summary());
    Ok(())
}

fn fetch_expansions(a: FetchArgs) -> Result<(), Failure> {
    let keywords: BTreeSet<String> = graph::read_keywords(open(&a.keywords)?).context(a.keywords.display())?;
    let client = conceptnet::Client::new(&a.base_url, &a.lang).map_err(|e| Failure {
        code: EXIT_RUNTIME,
        error: e,
    })?;
    let file = File::create(&a.out).context(format!("creating {}", a.out.display()))?;
    let mut w = BufWriter::new(file);
    for kw in &keywords {
        let words = client.related(kw, a.limit).map_err(|e| Failure {
            code: EXIT_RUNTIME,
            error: e.context(format!("fetching expansions for {kw}")),
        })?;
        writeln!(w, "{kw}\t{}", words.join(",")).context("writing expansions")?;
    }
    w.flush().context("writing expansions")
}
