use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};

use texmetric_core::boost::Booster;
use texmetric_core::cqfb::{log_energy, Standardizer};
use texmetric_core::dataio::{
    load_dataset, read_features, read_model, save_dataset, synth_corpus, write_atomic,
    write_features, write_model, SynthSpec,
};
use texmetric_core::eval::{
    accuracy, discrimination_error, dissimilarity_matrix, gaussian_nb, knn_classify,
    sample_representatives,
};
use texmetric_core::{
    build_filter_bank, generate_triplets, signal_features, ConfusionMatrix, FeatureVector,
    IntegrationMode, MahalanobisModel, Metric,
};

mod config;

use config::{Classifier, DimRange, MetricArg, PipelineConfig};

#[derive(Parser)]
#[command(
    name = "texmetric",
    version,
    about = "Texture classification from 3-axis vibration recordings"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a seeded synthetic dataset from a TOML spec.
    Synth {
        spec: PathBuf,
        out_dir: PathBuf,
        /// Overrides the spec's rng_seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Compute filter-bank features for every recording of a dataset.
    Extract {
        dataset: PathBuf,
        out_csv: PathBuf,
        #[command(flatten)]
        opts: Opts,
    },
    /// Learn a Mahalanobis metric from a feature CSV.
    Train {
        features: PathBuf,
        out_model: PathBuf,
        #[command(flatten)]
        opts: Opts,
    },
    /// Classify a test set and report accuracy.
    ///
    /// With --sweep-dims, TRAIN and TEST are dataset directories and features
    /// are extracted for every filter-bank size in the range.
    Evaluate {
        train: PathBuf,
        test: PathBuf,
        #[arg(long, default_value = "euclidean")]
        metric: MetricArg,
        /// Confusion matrix CSV (or the sweep table with --sweep-dims).
        #[arg(long, short)]
        out: Option<PathBuf>,
        #[arg(long, value_name = "N1..N2")]
        sweep_dims: Option<DimRange>,
        #[command(flatten)]
        opts: Opts,
    },
    /// Pairwise class dissimilarity and average discrimination error.
    Discriminate {
        features: PathBuf,
        out_csv: PathBuf,
        #[arg(long, default_value = "euclidean")]
        metric: MetricArg,
        #[command(flatten)]
        opts: Opts,
    },
}

/// Flags that override the config file.
#[derive(Args, Default)]
struct Opts {
    /// TOML pipeline config.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    bins: Option<usize>,
    #[arg(long)]
    fmax: Option<f64>,
    #[arg(long)]
    mode: Option<IntegrationMode>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long, value_enum)]
    classifier: Option<Classifier>,
    #[arg(long)]
    regularizer: Option<f64>,
    #[arg(long)]
    max_iterations: Option<usize>,
    /// Use ln(1 + a) features (applied at extraction).
    #[arg(long)]
    log_energy: bool,
    /// Z-score features with statistics of the training set.
    #[arg(long)]
    standardize: bool,
    /// Keep this many randomly chosen samples per class of the reference set.
    #[arg(long)]
    representatives: Option<usize>,
}

impl Opts {
    fn resolve(&self) -> anyhow::Result<PipelineConfig> {
        let mut c = PipelineConfig::load(self.config.as_deref())?;
        macro_rules! take {
            ($($field:ident),*) => { $( if let Some(v) = self.$field { c.$field = v; } )* };
        }
        take!(
            seed,
            alpha,
            bins,
            fmax,
            mode,
            k,
            classifier,
            regularizer,
            max_iterations
        );
        if self.representatives.is_some() {
            c.representatives = self.representatives;
        }
        c.log_energy |= self.log_energy;
        c.standardize |= self.standardize;
        c.filter_bank()?;
        Ok(c)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

/// 1 for numerical failures, 2 for bad input and I/O.
fn exit_code(e: &anyhow::Error) -> u8 {
    let computational = e
        .chain()
        .filter_map(|c| c.downcast_ref::<texmetric_core::Error>())
        .any(texmetric_core::Error::is_computational);
    if computational {
        1
    } else {
        2
    }
}

fn run(command: Command) -> anyhow::Result<()> {
    match command {
        Command::Synth {
            spec,
            out_dir,
            seed,
        } => synth(&spec, &out_dir, seed),
        Command::Extract {
            dataset,
            out_csv,
            opts,
        } => {
            let cfg = opts.resolve()?;
            let features = extract(&dataset, &cfg, cfg.bins)?;
            write_features(&out_csv, &features)?;
            println!(
                "wrote {} feature vectors of dimension {} to {}",
                features.len(),
                cfg.bins,
                out_csv.display()
            );
            Ok(())
        }
        Command::Train {
            features,
            out_model,
            opts,
        } => {
            let cfg = opts.resolve()?;
            let features = standardized(read_features(&features)?, &cfg)?;
            let model = train(&features, &cfg, true)?;
            write_model(&out_model, &model)?;
            println!("wrote {}", out_model.display());
            Ok(())
        }
        Command::Evaluate {
            train,
            test,
            metric,
            out,
            sweep_dims,
            opts,
        } => {
            let cfg = opts.resolve()?;
            match sweep_dims {
                Some(range) => sweep(&train, &test, &metric, range, out.as_deref(), &cfg),
                None => evaluate(&train, &test, &metric, out.as_deref(), &cfg),
            }
        }
        Command::Discriminate {
            features,
            out_csv,
            metric,
            opts,
        } => {
            let cfg = opts.resolve()?;
            let mut features = read_features(&features)?;
            if let Some(n) = cfg.representatives {
                features = sample_representatives(&features, n, cfg.seed)?;
            }
            let features = standardized(features, &cfg)?;
            let metric = match metric {
                MetricArg::Boost => {
                    bail!("discriminate needs a trained model file or 'euclidean', not 'boost'")
                }
                other => resolve_metric(&other, &features, &cfg)?,
            };
            let dis = dissimilarity_matrix(&features, &metric)?;
            write_atomic(&out_csv, &dis.to_csv())?;
            println!(
                "average discrimination error: {:.2}%",
                discrimination_error(&dis)?
            );
            Ok(())
        }
    }
}

fn synth(spec_path: &Path, out_dir: &Path, seed: Option<u64>) -> anyhow::Result<()> {
    let mut spec = SynthSpec::from_file(spec_path)?;
    if let Some(seed) = seed {
        spec.rng_seed = seed;
    }
    let dataset = synth_corpus(&spec)?;
    save_dataset(&dataset, out_dir)?;
    println!(
        "wrote {} recordings in {} classes to {}",
        dataset.len(),
        dataset.classes().len(),
        out_dir.display()
    );
    Ok(())
}

fn extract(
    dataset: &Path,
    cfg: &PipelineConfig,
    bins: usize,
) -> anyhow::Result<Vec<FeatureVector>> {
    let bank = build_filter_bank(
        PipelineConfig {
            bins,
            ..cfg.clone()
        }
        .filter_bank()?,
    )?;
    let dataset = load_dataset(dataset)?;
    dataset
        .entries()
        .iter()
        .map(|(label, signal)| {
            let f = signal_features(signal, &bank, cfg.mode)?.with_label(label.clone());
            Ok(if cfg.log_energy { log_energy(&f) } else { f })
        })
        .collect()
}

fn standardized(
    features: Vec<FeatureVector>,
    cfg: &PipelineConfig,
) -> anyhow::Result<Vec<FeatureVector>> {
    if !cfg.standardize {
        return Ok(features);
    }
    Ok(Standardizer::fit(&features)?.apply_all(&features)?)
}

fn train(
    features: &[FeatureVector],
    cfg: &PipelineConfig,
    verbose: bool,
) -> anyhow::Result<MahalanobisModel> {
    let tc = cfg.train()?;
    let triplets = generate_triplets(features, cfg.impostors_per_pair, cfg.seed)?;
    let mut booster = Booster::new(&triplets, features, tc)?;
    let reason = booster.run()?;
    let model = booster.into_model();
    if verbose {
        let h = model.loss_history();
        println!(
            "{} triplets, {} rounds ({reason:?}), loss {:.6} -> {:.6}",
            triplets.len(),
            model.terms().len(),
            h[0],
            h[h.len() - 1]
        );
    }
    Ok(model)
}

fn resolve_metric(
    arg: &MetricArg,
    train_set: &[FeatureVector],
    cfg: &PipelineConfig,
) -> anyhow::Result<Metric> {
    Ok(match arg {
        MetricArg::Euclidean => Metric::Euclidean,
        MetricArg::Boost => Metric::Learned(train(train_set, cfg, false)?),
        MetricArg::File(path) => Metric::Learned(
            read_model(path).with_context(|| format!("cannot load model {}", path.display()))?,
        ),
    })
}

/// Standardizes both sets with training statistics and keeps
/// representatives of the training set if requested.
fn prepare(
    train: Vec<FeatureVector>,
    test: Vec<FeatureVector>,
    cfg: &PipelineConfig,
) -> anyhow::Result<(Vec<FeatureVector>, Vec<FeatureVector>)> {
    let (train, test) = if cfg.standardize {
        let s = Standardizer::fit(&train)?;
        (s.apply_all(&train)?, s.apply_all(&test)?)
    } else {
        (train, test)
    };
    let train = match cfg.representatives {
        Some(n) => sample_representatives(&train, n, cfg.seed)?,
        None => train,
    };
    Ok((train, test))
}

fn classify(
    train: &[FeatureVector],
    test: &[FeatureVector],
    metric: &MetricArg,
    cfg: &PipelineConfig,
) -> anyhow::Result<ConfusionMatrix> {
    let predicted = match cfg.classifier {
        Classifier::Knn => knn_classify(train, test, cfg.k, &resolve_metric(metric, train, cfg)?)?,
        Classifier::Nb => {
            if *metric != MetricArg::Euclidean {
                bail!("the naive Bayes classifier does not use a metric; drop --metric");
            }
            gaussian_nb(train, test)?
        }
    };
    let truth = test
        .iter()
        .map(|f| f.label().context("test feature without a label"))
        .collect::<anyhow::Result<Vec<_>>>()?;
    Ok(ConfusionMatrix::from_labels(&truth, &predicted)?)
}

fn evaluate(
    train: &Path,
    test: &Path,
    metric: &MetricArg,
    out: Option<&Path>,
    cfg: &PipelineConfig,
) -> anyhow::Result<()> {
    let (train, test) = prepare(read_features(train)?, read_features(test)?, cfg)?;
    let confusion = classify(&train, &test, metric, cfg)?;
    println!(
        "accuracy: {:.2}% ({}/{})",
        100.0 * accuracy(&confusion)?,
        confusion.correct(),
        confusion.total()
    );
    if let Some(out) = out {
        write_atomic(out, &confusion.to_csv())?;
    }
    Ok(())
}

fn sweep(
    train_dir: &Path,
    test_dir: &Path,
    metric: &MetricArg,
    range: DimRange,
    out: Option<&Path>,
    cfg: &PipelineConfig,
) -> anyhow::Result<()> {
    if let MetricArg::File(_) = metric {
        bail!("--sweep-dims changes the feature dimension; use 'euclidean' or 'boost'");
    }
    let mut table = String::from("bins,accuracy\n");
    for bins in range.0 {
        let (train, test) = prepare(
            extract(train_dir, cfg, bins)?,
            extract(test_dir, cfg, bins)?,
            cfg,
        )?;
        let acc = 100.0 * accuracy(&classify(&train, &test, metric, cfg)?)?;
        println!("bins={bins} accuracy: {acc:.2}%");
        table.push_str(&format!("{bins},{acc:.4}\n"));
    }
    if let Some(out) = out {
        write_atomic(out, &table)?;
    }
    Ok(())
}
