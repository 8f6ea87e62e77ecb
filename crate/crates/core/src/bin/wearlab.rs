use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use wearlab::eval::{ExperimentConfig, Scenario};
use wearlab::features::read_features_csv;
use wearlab::ingest::{load_cohort, SubjectMeta};
use wearlab::learners::{ModelKind, ModelSpec};
use wearlab::pipeline::{self, PipelineConfig};
use wearlab::select::Method;
use wearlab::synth::{self, CohortSpec, EffectProfile};
use wearlab::Error;

#[derive(Parser)]
#[command(name = "wearlab", version, about = "Wearable-cohort weight-loss prediction pipeline")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic cohort in the export layout.
    Synth(SynthArgs),
    /// Clean a cohort and write features.csv and registry.json.
    Extract {
        #[arg(long)]
        cohort: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Correlations and group comparisons: corr.csv, summary.json.
    Stats {
        #[arg(long)]
        features: PathBuf,
        /// Cohort directory, for the age and sex rows.
        #[arg(long)]
        cohort: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Feature selection on the whole cohort: selection.json.
    Select {
        #[arg(long)]
        features: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        exp: ExperimentArgs,
    },
    /// Paired leave-one-out evaluation: eval.json, roc.csv, results_table.csv.
    Evaluate {
        #[arg(long)]
        features: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        exp: ExperimentArgs,
    },
    /// Every stage from a JSON configuration; flags override the file.
    Run {
        #[arg(long)]
        cohort: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        no_stats: bool,
        #[command(flatten)]
        exp: ExperimentArgs,
    },
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 55)]
    n_positive: usize,
    #[arg(long, default_value_t = 38)]
    n_negative: usize,
    #[arg(long, default_value_t = 14)]
    days: u32,
    /// Multiplies every calibrated group difference.
    #[arg(long, default_value_t = 1.0)]
    effect_scale: f64,
    /// Give the stress-score signals no group difference.
    #[arg(long)]
    no_emotional_effect: bool,
    /// Shuffle the weight outcomes with this seed (null cohort).
    #[arg(long)]
    permute_labels: Option<u64>,
}

#[derive(Args)]
struct ExperimentArgs {
    /// JSON configuration (pipeline or experiment fields).
    #[arg(long)]
    config: Option<PathBuf>,
    /// First of the run seeds; also seeds selection.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    runs: Option<u64>,
    #[arg(long)]
    scenario: Option<Scenario>,
    #[arg(long)]
    selector: Option<Method>,
    #[arg(long)]
    model: Option<ModelKind>,
    /// Model hyperparameter, `name=value`; repeatable.
    #[arg(long = "param", value_name = "NAME=VALUE")]
    params: Vec<String>,
    #[arg(long)]
    max_features: Option<usize>,
    #[arg(long)]
    cv_folds: Option<usize>,
    #[arg(long)]
    candidate_pool: Option<usize>,
    /// Select once per seed on all subjects (leaks test subjects).
    #[arg(long)]
    leaky_selection: bool,
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long)]
    verbose: bool,
}

impl ExperimentArgs {
    fn resolve(&self) -> Result<PipelineConfig, Error> {
        let mut c = match &self.config {
            Some(p) => PipelineConfig::load(p)?,
            None => PipelineConfig::default(),
        };
        let e: &mut ExperimentConfig = &mut c.experiment;
        if let Some(kind) = self.model {
            if kind != e.model.kind {
                e.model = ModelSpec::new(kind).with_seed(e.model.seed);
            }
        }
        for p in &self.params {
            let (k, v) = p
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("--param {p:?} is not name=value")))?;
            let v: f64 = v
                .trim()
                .parse()
                .map_err(|_| Error::Config(format!("--param {p:?}: value is not a number")))?;
            e.model = e.model.clone().with(k.trim(), v);
        }
        if let Some(s) = self.scenario {
            e.scenario = s;
        }
        if let Some(m) = self.selector {
            e.selection.method = m;
        }
        if self.seed.is_some() || self.runs.is_some() {
            let first = self.seed.unwrap_or_else(|| e.seeds.first().copied().unwrap_or(0));
            let runs = self.runs.unwrap_or(e.seeds.len() as u64);
            e.seeds = (first..first + runs).collect();
            e.selection.seed = first;
        }
        if let Some(v) = self.max_features {
            e.selection.max_features = v;
        }
        if let Some(v) = self.cv_folds {
            e.selection.cv_folds = v;
        }
        if let Some(v) = self.candidate_pool {
            e.selection.candidate_pool = v;
        }
        e.leaky_selection |= self.leaky_selection;
        if let Some(t) = self.threads {
            c.threads = t;
        }
        c.verbose |= self.verbose;
        c.experiment.validate()?;
        Ok(c)
    }
}

fn load_metas(cohort: &Path) -> Result<Vec<SubjectMeta>, Error> {
    Ok(load_cohort(cohort)?.into_iter().map(|b| b.meta).collect())
}

fn synth(a: &SynthArgs) -> Result<(), Error> {
    let mut effects = EffectProfile::calibrated().scaled(a.effect_scale);
    if a.no_emotional_effect {
        effects = effects.without_emotional_state();
    }
    let spec = CohortSpec {
        n_positive: a.n_positive,
        n_negative: a.n_negative,
        days: a.days,
        effects,
        seed: a.seed,
        ..CohortSpec::default()
    };
    let mut cohort = synth::generate_cohort(&spec)?;
    if let Some(s) = a.permute_labels {
        cohort = synth::plant_label_permutation(&cohort, s);
    }
    synth::write_synthetic_cohort(&a.out, &cohort)?;
    println!("wrote {} subjects to {}", cohort.len(), a.out.display());
    Ok(())
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Synth(a) => synth(&a),
        Command::Extract { cohort, out } => {
            let c = pipeline::ingest_and_extract(&cohort)?;
            pipeline::write_features(&out, &c.matrix)?;
            println!("{} subjects featurized into {}", c.matrix.len(), out.display());
            Ok(())
        }
        Command::Stats { features, cohort, out } => {
            let matrix = read_features_csv(&features)?;
            let metas = cohort.as_deref().map(load_metas).transpose()?;
            let s = pipeline::write_stats(&out, &matrix, metas.as_deref())?;
            print!("{}", wearlab::cohortstats::render_summary(&s.groups));
            Ok(())
        }
        Command::Select { features, out, exp } => {
            let c = exp.resolve()?;
            let matrix = read_features_csv(&features)?;
            let r = pipeline::with_threads(c.threads, || {
                pipeline::write_selection(&out, &matrix, &c.experiment)
            })??;
            let reg = wearlab::features::FeatureRegistry::global();
            for id in &r.selected {
                println!("{id}\t{}", reg.name(*id));
            }
            Ok(())
        }
        Command::Evaluate { features, out, exp } => {
            let c = exp.resolve()?;
            let matrix = read_features_csv(&features)?;
            let r = pipeline::with_threads(c.threads, || {
                pipeline::write_evaluation(&out, &matrix, &c.experiment)
            })??;
            println!("mean AUC {:.4} over runs {:?}", r.mean_auc, r.per_run_auc);
            Ok(())
        }
        Command::Run {
            cohort,
            out,
            no_stats,
            exp,
        } => {
            let mut c = exp.resolve()?;
            if let Some(p) = cohort {
                c.cohort = p;
            }
            if let Some(p) = out {
                c.output = p;
            }
            c.stats &= !no_stats;
            let o = pipeline::run_pipeline(&c)?;
            println!(
                "mean AUC {:.4}; {} artifacts in {}",
                o.report.mean_auc,
                o.artifacts.len(),
                c.output.display()
            );
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("wearlab: error: {e}");
            match e {
                Error::Config(_) => ExitCode::from(2),
                _ => ExitCode::FAILURE,
            }
        }
    }
}
