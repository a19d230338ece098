use std::collections::BTreeSet;
use std::fmt::Display;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use amfpmc::files::{self, ConfigFile};
use amfpmc::model_io::{read_model, write_model};
use amfpmc::report_io::{render_json, render_text, ReportFormat};
use amfpmc::tsv::{self, ParseMode};
use amfpmc_core::metrics::MultiClassReport;
use amfpmc_core::phrase::{ClassVocabulary, Grouping, Normalizer, DEFAULT_STOPLIST, DEFAULT_VERBS};
use amfpmc_core::pipeline::{
    edge_samples, grid_search, holdout_evaluate, retrospective_evaluate, retrospective_split,
    retrospective_training_set, train, GridConfig, GridObjective, GridSpec, Sample, TrainConfig,
    DEFAULT_TEST_CAP,
};
use amfpmc_core::synth::{block_pairs, generate_synthetic, SyntheticConfig};
use amfpmc_core::{EvalMode, Hyperparameters, TypedInteractionGraph};
use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(
    name = "amfpmc",
    version,
    about = "Multi-class link prediction on typed interaction graphs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Reduce interaction sentences to keyword phrases and index them as classes.
    Extract(ExtractArgs),
    /// Train a model on an indexed interaction list.
    Train(TrainArgs),
    /// Run the k-fold or two-snapshot evaluation.
    #[command(subcommand)]
    Evaluate(EvaluateCommand),
    /// Pick hyperparameters by validation score.
    Gridsearch(GridArgs),
    /// Print the top classes for drug pairs.
    Predict(PredictArgs),
    /// Write a model's drug embeddings as CSV.
    ExportEmbeddings(ExportArgs),
    /// Generate a planted block-structured interaction graph.
    Synth(SynthArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Holdout,
    Retrospective,
}

impl From<Mode> for EvalMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Holdout => EvalMode::Holdout,
            Mode::Retrospective => EvalMode::Retrospective,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Objective {
    Accuracy,
    MacroAuroc,
}

#[derive(Args)]
struct HpArgs {
    /// TOML file with any of: embedding_dim, dropout, epochs, batch_size,
    /// learning_rate, alpha, seed, balanced. Flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long)]
    dropout: Option<f64>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    batch: Option<usize>,
    #[arg(long)]
    lr: Option<f64>,
    /// Propagation factor in [0, 1].
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Use unit class weights.
    #[arg(long)]
    no_balance: bool,
}

impl HpArgs {
    fn resolve(&self, mode: EvalMode) -> Result<TrainConfig> {
        let mut hp = match mode {
            EvalMode::Holdout => Hyperparameters::holdout_preset(),
            EvalMode::Retrospective => Hyperparameters::retrospective_preset(),
        };
        let file = match &self.config {
            Some(p) => files::read_config(p).with_context(|| format!("config {}", p.display()))?,
            None => ConfigFile::default(),
        };
        hp.embedding_dim = self.dim.or(file.embedding_dim).unwrap_or(hp.embedding_dim);
        hp.dropout = self.dropout.or(file.dropout).unwrap_or(hp.dropout);
        hp.epochs = self.epochs.or(file.epochs).unwrap_or(hp.epochs);
        hp.batch_size = self.batch.or(file.batch_size).unwrap_or(hp.batch_size);
        hp.learning_rate = self.lr.or(file.learning_rate).unwrap_or(hp.learning_rate);
        hp.alpha = self.alpha.or(file.alpha).unwrap_or(hp.alpha);
        hp.seed = self.seed.or(file.seed).unwrap_or(hp.seed);
        hp.validate()?;
        let balanced = !self.no_balance && file.balanced.unwrap_or(true);
        Ok(TrainConfig {
            hp,
            balanced,
            propagate: true,
        })
    }
}

#[derive(Args)]
struct ExtractArgs {
    /// Sentence-mode TSV.
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    stoplist: Option<PathBuf>,
    /// Direction-verb table.
    #[arg(long)]
    verbs: Option<PathBuf>,
    #[arg(long, value_enum)]
    mode: Mode,
    /// Keep the N most frequent phrases [default: 35 retrospective, 65 holdout].
    #[arg(long, conflicts_with = "min_count")]
    top_n: Option<usize>,
    /// Keep phrases seen at least this many times.
    #[arg(long)]
    min_count: Option<usize>,
    /// Indexed TSV output.
    #[arg(long)]
    out: PathBuf,
    /// Vocabulary output.
    #[arg(long)]
    vocab: PathBuf,
}

#[derive(Args)]
struct TrainArgs {
    #[arg(long)]
    interactions: PathBuf,
    #[arg(long, value_enum)]
    mode: Mode,
    /// Number of classes [default: largest class index + 1].
    #[arg(long)]
    n_classes: Option<usize>,
    /// Class-0 pairs sampled per edge (retrospective mode).
    #[arg(long, default_value_t = 1.0)]
    negative_ratio: f64,
    #[command(flatten)]
    hp: HpArgs,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ReportArgs {
    /// Write the report here as well as printing it.
    #[arg(long)]
    report: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "text")]
    format: ReportFormat,
    /// Vocabulary file for class names.
    #[arg(long)]
    labels: Option<PathBuf>,
}

#[derive(Subcommand)]
enum EvaluateCommand {
    /// Stratified k-fold over one snapshot.
    Holdout {
        #[arg(long)]
        interactions: PathBuf,
        #[arg(long)]
        n_classes: Option<usize>,
        #[arg(long, default_value_t = 5)]
        k: usize,
        #[command(flatten)]
        hp: HpArgs,
        #[command(flatten)]
        out: ReportArgs,
    },
    /// Train on the earlier snapshot, test on pairs it leaves unlabeled.
    Retrospective {
        #[arg(long)]
        t0: PathBuf,
        #[arg(long)]
        t1: PathBuf,
        #[arg(long)]
        n_classes: Option<usize>,
        #[arg(long, default_value_t = 1.0)]
        negative_ratio: f64,
        /// Only score pairs whose drugs are both listed (one id per line).
        #[arg(long)]
        subset: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_TEST_CAP)]
        test_cap: usize,
        #[command(flatten)]
        hp: HpArgs,
        #[command(flatten)]
        out: ReportArgs,
    },
}

#[derive(Args)]
struct GridArgs {
    #[arg(long)]
    interactions: PathBuf,
    #[arg(long, value_enum)]
    mode: Mode,
    #[arg(long)]
    n_classes: Option<usize>,
    /// TOML grid with one array per hyperparameter.
    #[arg(
        long,
        required_unless_present = "full_grid",
        conflicts_with = "full_grid"
    )]
    grid: Option<PathBuf>,
    /// Search the complete published grid (88,000 points).
    #[arg(long)]
    full_grid: bool,
    #[arg(long, default_value_t = 0.2)]
    validation_fraction: f64,
    #[arg(long, value_enum, default_value = "accuracy")]
    objective: Objective,
    #[arg(long, default_value_t = 1.0)]
    negative_ratio: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    no_balance: bool,
    /// Every point and its score as TSV.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PredictArgs {
    #[arg(long)]
    model: PathBuf,
    /// Two-column TSV of drug ids.
    #[arg(long)]
    pairs: PathBuf,
    #[arg(long, default_value_t = 3)]
    top_k: usize,
    #[arg(long)]
    labels: Option<PathBuf>,
}

#[derive(Args)]
struct ExportArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    blocks: usize,
    /// Number of classes [default: one per block pair, plus class 0 in
    /// retrospective mode].
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    p: f64,
    #[arg(long, default_value_t = 0.0)]
    noise: f64,
    #[arg(long, default_value_t = 0.2)]
    holdout: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value = "holdout")]
    mode: Mode,
    /// Earlier snapshot (held-out edges removed).
    #[arg(long)]
    out_t0: PathBuf,
    /// Later snapshot (all edges).
    #[arg(long)]
    out_t1: PathBuf,
    /// Block of each drug.
    #[arg(long)]
    out_blocks: Option<PathBuf>,
}

fn print_config(entries: &[(&str, &dyn Display)]) {
    for (k, v) in entries {
        println!("# {k} = {v}");
    }
}

fn print_hp(cfg: &TrainConfig) {
    let hp = &cfg.hp;
    print_config(&[
        ("embedding_dim", &hp.embedding_dim),
        ("dropout", &hp.dropout),
        ("epochs", &hp.epochs),
        ("batch_size", &hp.batch_size),
        ("learning_rate", &hp.learning_rate),
        ("alpha", &hp.alpha),
        ("balanced", &cfg.balanced),
        ("seed", &hp.seed),
    ]);
}

fn show_path(p: &Option<PathBuf>) -> String {
    p.as_ref()
        .map_or_else(|| "-".to_string(), |p| p.display().to_string())
}

fn load(path: &Path, mode: EvalMode, n_classes: Option<usize>) -> Result<TypedInteractionGraph> {
    tsv::load_graph(path, mode, n_classes).with_context(|| format!("{}", path.display()))
}

fn label_fn(labels: &Option<PathBuf>) -> Result<impl Fn(usize) -> Option<String>> {
    let names = match labels {
        Some(p) => files::read_labels(p).with_context(|| format!("{}", p.display()))?,
        None => Vec::new(),
    };
    Ok(move |c: usize| names.get(c).filter(|s| !s.is_empty()).cloned())
}

fn emit_report(report: &MultiClassReport, out: &ReportArgs) -> Result<()> {
    let label = label_fn(&out.labels)?;
    print!("{}", render_text(report, &label));
    if let Some(path) = &out.report {
        let text = match out.format {
            ReportFormat::Text => render_text(report, &label),
            ReportFormat::Json => render_json(report)?,
        };
        std::fs::write(path, text).with_context(|| format!("{}", path.display()))?;
    }
    Ok(())
}

fn training_samples(
    graph: &TypedInteractionGraph,
    negative_ratio: f64,
    seed: u64,
) -> Result<Vec<Sample>> {
    Ok(match graph.mode() {
        EvalMode::Holdout => edge_samples(graph),
        EvalMode::Retrospective => retrospective_training_set(graph, negative_ratio, seed)?,
    })
}

fn extract(a: ExtractArgs) -> Result<()> {
    let mode: EvalMode = a.mode.into();
    let grouping = match (a.top_n, a.min_count) {
        (_, Some(m)) => Grouping::MinCount(m),
        (Some(n), None) => Grouping::TopN(n),
        (None, None) => Grouping::TopN(if mode == EvalMode::Retrospective {
            35
        } else {
            65
        }),
    };
    print_config(&[
        ("command", &"extract"),
        ("input", &a.input.display()),
        ("mode", &mode.as_str()),
        ("grouping", &format!("{grouping:?}")),
        ("stoplist", &show_path(&a.stoplist)),
        ("verbs", &show_path(&a.verbs)),
        ("seed", &"none (deterministic)"),
    ]);
    let read = |p: &Option<PathBuf>, default: &str| -> Result<String> {
        match p {
            Some(p) => std::fs::read_to_string(p).with_context(|| format!("{}", p.display())),
            None => Ok(default.to_string()),
        }
    };
    let normalizer = Normalizer::from_tables(
        &read(&a.stoplist, DEFAULT_STOPLIST)?,
        &read(&a.verbs, DEFAULT_VERBS)?,
    )?;
    let records = tsv::parse_interactions_file(&a.input, ParseMode::Sentences)
        .with_context(|| format!("{}", a.input.display()))?;
    let mut phrases = Vec::with_capacity(records.len());
    for r in &records {
        let s = r.sentence().expect("sentence mode");
        let p = normalizer
            .extract_phrase(&s)
            .with_context(|| format!("{}: line {}", a.input.display(), r.line))?;
        phrases.push(p);
    }
    let vocab = ClassVocabulary::build(&phrases, mode, grouping)?;
    let mut out = String::new();
    let mut dropped = 0usize;
    for (r, p) in records.iter().zip(&phrases) {
        match vocab.encode(p) {
            Ok(c) => out.push_str(&format!("{}\t{}\t{}\n", r.drug_a, r.drug_b, c.0)),
            Err(_) => dropped += 1,
        }
    }
    std::fs::write(&a.out, out).with_context(|| format!("{}", a.out.display()))?;
    files::write_vocabulary(&a.vocab, &vocab)?;
    println!(
        "records {}  classes {}  dropped {dropped}",
        records.len(),
        vocab.n_classes()
    );
    Ok(())
}

fn train_cmd(a: TrainArgs) -> Result<()> {
    let mode: EvalMode = a.mode.into();
    let cfg = a.hp.resolve(mode)?;
    print_config(&[
        ("command", &"train"),
        ("interactions", &a.interactions.display()),
        ("mode", &mode.as_str()),
        ("negative_ratio", &a.negative_ratio),
        ("out", &a.out.display()),
    ]);
    print_hp(&cfg);
    let graph = load(&a.interactions, mode, a.n_classes)?;
    let samples = training_samples(&graph, a.negative_ratio, cfg.hp.seed)?;
    let out = train(&graph, &samples, &cfg)?;
    for (e, l) in out.epoch_losses.iter().enumerate() {
        println!("epoch {:>3}  loss {l:.6}", e + 1);
    }
    write_model(&a.out, &out.params, graph.roster())?;
    println!(
        "drugs {}  classes {}  samples {}",
        graph.n_drugs(),
        graph.n_classes(),
        samples.len()
    );
    Ok(())
}

fn evaluate(cmd: EvaluateCommand) -> Result<()> {
    match cmd {
        EvaluateCommand::Holdout {
            interactions,
            n_classes,
            k,
            hp,
            out,
        } => {
            let cfg = hp.resolve(EvalMode::Holdout)?;
            print_config(&[
                ("command", &"evaluate holdout"),
                ("interactions", &interactions.display()),
                ("k", &k),
                ("report", &show_path(&out.report)),
            ]);
            print_hp(&cfg);
            let graph = load(&interactions, EvalMode::Holdout, n_classes)?;
            let result = holdout_evaluate(&graph, &cfg, k, cfg.hp.seed)?;
            for (f, r) in result.folds.iter().enumerate() {
                println!(
                    "fold {f}  accuracy {:.4}  macro_auroc {:.4}",
                    r.accuracy, r.macro_auroc
                );
            }
            emit_report(&result.mean, &out)
        }
        EvaluateCommand::Retrospective {
            t0,
            t1,
            n_classes,
            negative_ratio,
            subset,
            test_cap,
            hp,
            out,
        } => {
            let cfg = hp.resolve(EvalMode::Retrospective)?;
            print_config(&[
                ("command", &"evaluate retrospective"),
                ("t0", &t0.display()),
                ("t1", &t1.display()),
                ("negative_ratio", &negative_ratio),
                ("subset", &show_path(&subset)),
                ("test_cap", &test_cap),
                ("report", &show_path(&out.report)),
            ]);
            print_hp(&cfg);
            let g0 = load(&t0, EvalMode::Retrospective, n_classes)?;
            let g1 = load(&t1, EvalMode::Retrospective, n_classes)?;
            let split = retrospective_split(&g0, &g1, negative_ratio, cfg.hp.seed, test_cap)?;
            let keep = match &subset {
                Some(p) => {
                    let text =
                        std::fs::read_to_string(p).with_context(|| format!("{}", p.display()))?;
                    let ids = tsv::parse_id_list(&text);
                    let found: BTreeSet<_> = ids
                        .iter()
                        .filter_map(|id| split.graph.roster().get(id))
                        .collect();
                    if found.len() < ids.len() {
                        eprintln!(
                            "note: {} subset ids are not in both snapshots",
                            ids.len() - found.len()
                        );
                    }
                    Some(found)
                }
                None => None,
            };
            println!(
                "drugs {}  train {}  test {}",
                split.graph.n_drugs(),
                split.train.len(),
                split.test.len()
            );
            let report = retrospective_evaluate(&split, &cfg, keep.as_ref())?;
            emit_report(&report, &out)
        }
    }
}

fn gridsearch(a: GridArgs) -> Result<()> {
    let mode: EvalMode = a.mode.into();
    let grid = match &a.grid {
        Some(p) => files::read_grid(p).with_context(|| format!("{}", p.display()))?,
        None => GridSpec::full_table(),
    };
    let cfg = GridConfig {
        validation_fraction: a.validation_fraction,
        seed: a.seed,
        objective: match a.objective {
            Objective::Accuracy => GridObjective::Accuracy,
            Objective::MacroAuroc => GridObjective::MacroAuroc,
        },
        balanced: !a.no_balance,
    };
    print_config(&[
        ("command", &"gridsearch"),
        ("interactions", &a.interactions.display()),
        ("mode", &mode.as_str()),
        (
            "grid",
            &a.grid
                .as_ref()
                .map_or_else(|| "full".to_string(), |p| p.display().to_string()),
        ),
        ("points", &grid.len()),
        ("validation_fraction", &cfg.validation_fraction),
        ("objective", &format!("{:?}", cfg.objective)),
        ("negative_ratio", &a.negative_ratio),
        ("balanced", &cfg.balanced),
        ("seed", &cfg.seed),
    ]);
    let graph = load(&a.interactions, mode, a.n_classes)?;
    let samples = training_samples(&graph, a.negative_ratio, a.seed)?;
    let result = grid_search(&graph, &samples, &grid, &cfg)?;
    let mut table =
        String::from("embedding_dim\tdropout\tepochs\tbatch_size\tlearning_rate\talpha\tscore\n");
    for (hp, score) in &result.results {
        table.push_str(&format!(
            "{}\t{}\t{}\t{}\t{}\t{}\t{score}\n",
            hp.embedding_dim, hp.dropout, hp.epochs, hp.batch_size, hp.learning_rate, hp.alpha
        ));
    }
    if let Some(p) = &a.out {
        std::fs::write(p, &table).with_context(|| format!("{}", p.display()))?;
    }
    let b = &result.best;
    let best_score = result
        .results
        .iter()
        .find(|(hp, _)| hp == b)
        .map_or(f64::NAN, |r| r.1);
    println!(
        "best  embedding_dim {}  dropout {}  epochs {}  batch_size {}  learning_rate {}  alpha {}  score {best_score:.4}",
        b.embedding_dim, b.dropout, b.epochs, b.batch_size, b.learning_rate, b.alpha
    );
    Ok(())
}

fn predict(a: PredictArgs) -> Result<()> {
    print_config(&[
        ("command", &"predict"),
        ("model", &a.model.display()),
        ("pairs", &a.pairs.display()),
        ("top_k", &a.top_k),
        ("labels", &show_path(&a.labels)),
        ("seed", &"none (deterministic)"),
    ]);
    let (params, roster) =
        read_model(&a.model).with_context(|| format!("{}", a.model.display()))?;
    let text =
        std::fs::read_to_string(&a.pairs).with_context(|| format!("{}", a.pairs.display()))?;
    let pairs = tsv::parse_pairs(&text).with_context(|| format!("{}", a.pairs.display()))?;
    let label = label_fn(&a.labels)?;
    for (x, y) in pairs {
        let p = params.predict(roster.resolve(&x)?, roster.resolve(&y)?)?;
        let mut ranked: Vec<(usize, f64)> = p.into_iter().enumerate().collect();
        ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        let cells: Vec<String> = ranked
            .iter()
            .take(a.top_k)
            .map(|&(c, prob)| match label(c) {
                Some(name) => format!("{c}:{prob:.6}:{name}"),
                None => format!("{c}:{prob:.6}"),
            })
            .collect();
        println!("{x}\t{y}\t{}", cells.join("\t"));
    }
    Ok(())
}

fn export(a: ExportArgs) -> Result<()> {
    print_config(&[
        ("command", &"export-embeddings"),
        ("model", &a.model.display()),
        ("out", &a.out.display()),
        ("seed", &"none (deterministic)"),
    ]);
    let (params, roster) =
        read_model(&a.model).with_context(|| format!("{}", a.model.display()))?;
    files::write_embeddings(&a.out, &params.export_embeddings(&roster)?)?;
    Ok(())
}

fn synth(a: SynthArgs) -> Result<()> {
    let mode: EvalMode = a.mode.into();
    let offset = usize::from(mode == EvalMode::Retrospective);
    let k = a.k.unwrap_or(block_pairs(a.blocks) + offset);
    print_config(&[
        ("command", &"synth"),
        ("n", &a.n),
        ("blocks", &a.blocks),
        ("k", &k),
        ("p", &a.p),
        ("noise", &a.noise),
        ("holdout", &a.holdout),
        ("mode", &mode.as_str()),
        ("seed", &a.seed),
    ]);
    let cfg = SyntheticConfig {
        n_drugs: a.n,
        n_blocks: a.blocks,
        n_classes: k,
        mode,
        edge_probability: a.p,
        overrides: Vec::new(),
        label_noise: a.noise,
        holdout_fraction: a.holdout,
        seed: a.seed,
    };
    let s = generate_synthetic(&cfg)?;
    std::fs::write(&a.out_t0, tsv::render_graph(&s.t0))
        .with_context(|| format!("{}", a.out_t0.display()))?;
    std::fs::write(&a.out_t1, tsv::render_graph(&s.t1))
        .with_context(|| format!("{}", a.out_t1.display()))?;
    if let Some(p) = &a.out_blocks {
        let text: String = s
            .blocks
            .iter()
            .enumerate()
            .map(|(i, b)| {
                format!(
                    "{}\t{b}\n",
                    s.t1.roster().external_id(amfpmc_core::DrugIdx(i))
                )
            })
            .collect();
        std::fs::write(p, text).with_context(|| format!("{}", p.display()))?;
    }
    println!(
        "edges t0 {}  t1 {}  held_out {}",
        s.t0.n_edges(),
        s.t1.n_edges(),
        s.held_out.len()
    );
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Extract(a) => extract(a),
        Command::Train(a) => train_cmd(a),
        Command::Evaluate(c) => evaluate(c),
        Command::Gridsearch(a) => gridsearch(a),
        Command::Predict(a) => predict(a),
        Command::ExportEmbeddings(a) => export(a),
        Command::Synth(a) => synth(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let text = e.render().to_string();
            let cause: Vec<&str> = text
                .lines()
                .take_while(|l| !l.starts_with("Usage:") && !l.starts_with("For more information"))
                .map(str::trim)
                .filter(|l| !l.is_empty())
                .collect();
            eprintln!("error: {}", cause.join(" ").trim_start_matches("error: "));
            return ExitCode::from(2);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let msg = format!("{e:#}").replace(['\n', '\r'], " ");
            eprintln!("error: {msg}");
            ExitCode::FAILURE
        }
    }
}
