use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use patchlearn::dataio::{read_input_csv, read_labeled_csv, write_labeled_csv};
use patchlearn::experiment::{run_experiment, sweep, ExperimentConfig};
use patchlearn::plot::write_plot_csv;
use patchlearn::{load_model, save_model, Format, HarnessError, Result};
use patchlearn_core::datasets::{gen_curve1d, gen_mackey_glass, gen_manifold3d, gen_sinc2d, gen_sysid};
use patchlearn_core::datasets::{MackeyGlassConfig, SysIdData};
use patchlearn_core::metrics::rmse;
use patchlearn_core::{LabeledSet, Regressor};

#[derive(Parser)]
#[command(name = "patchlearn", version, about = "Patch learning experiments for fuzzy regression")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one of the five benchmark experiments and print its report.
    Experiment {
        id: u32,
        #[arg(long)]
        l_max: Option<usize>,
        /// Also save the lowest-loss model.
        #[arg(long)]
        save_model: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Sweep the number of patches on a labeled CSV file.
    Sweep {
        #[arg(long)]
        l_max: usize,
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        test: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Train on a CSV file or an experiment's training split and save the lowest-loss model.
    Train {
        #[arg(long, conflicts_with = "experiment", required_unless_present = "experiment")]
        data: Option<PathBuf>,
        #[arg(long)]
        experiment: Option<u32>,
        #[arg(long, default_value_t = 2)]
        l_max: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Predict with a saved model; reads `x1,..,xM[,y]`, writes `x1,..,xM,prediction`.
    Predict {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run an experiment and write tidy `series,x,y` plot data.
    ExportPlot {
        id: u32,
        #[arg(long)]
        l_max: Option<usize>,
        #[command(flatten)]
        common: Common,
    },
    /// Write an experiment's data set as CSV.
    ExportData {
        id: u32,
        #[arg(long, value_enum, default_value_t = Split::Train)]
        split: Split,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct Common {
    #[arg(long, default_value_t = 0.25)]
    alpha: f64,
    /// Trapezoidal MFs per input.
    #[arg(long, default_value_t = 2)]
    mfs: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Experiment 4 only: retrain every n steps of the online phase.
    #[arg(long, default_value_t = 1)]
    retrain_every: usize,
    #[arg(long, value_enum, default_value_t = OutFormat::Json)]
    format: OutFormat,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum OutFormat {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum Split {
    Train,
    Test,
}

impl Common {
    fn config(&self, l_max: Option<usize>) -> Result<ExperimentConfig> {
        if !self.alpha.is_finite() || self.alpha <= 0.0 {
            return Err(HarnessError::Argument(format!("--alpha must be positive, got {}", self.alpha)));
        }
        Ok(ExperimentConfig {
            l_max,
            alpha: self.alpha,
            mfs: self.mfs,
            seed: self.seed,
            retrain_every: self.retrain_every,
            ..ExperimentConfig::default()
        })
    }

    fn format(&self) -> Format {
        match self.format {
            OutFormat::Csv => Format::Csv,
            OutFormat::Json => Format::Json,
        }
    }
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).map_err(|e| HarnessError::io(p, e))?)),
        None => Box::new(io::stdout().lock()),
    })
}

fn read_csv(path: &Path) -> Result<LabeledSet> {
    let f = File::open(path).map_err(|e| HarnessError::io(path, e))?;
    read_labeled_csv(f)
}

fn dataset(id: u32, split: Split) -> Result<LabeledSet> {
    let data = match (id, split) {
        (1, Split::Train) => gen_curve1d(),
        (2, Split::Train) => gen_sinc2d(),
        (3, Split::Train) => gen_manifold3d(),
        (4, Split::Train) => gen_sysid().window(1, SysIdData::TRAIN_END),
        (4, Split::Test) => gen_sysid().window(SysIdData::TRAIN_END + 1, SysIdData::STEPS),
        (5, s) => {
            let mg = gen_mackey_glass(&MackeyGlassConfig::default())?;
            match s {
                Split::Train => mg.train,
                Split::Test => mg.test,
            }
        }
        (1..=3, Split::Test) => {
            return Err(HarnessError::Argument(format!("experiment {id} has no test split")));
        }
        _ => return Err(HarnessError::UnknownExperiment(id)),
    };
    Ok(data)
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Experiment { id, l_max, save_model: model_path, common } => {
            let run = run_experiment(id, &common.config(l_max)?)?;
            if let Some(p) = model_path {
                save_model(run.best_model(), &p)?;
            }
            run.report.write(common.format(), output(common.out.as_deref())?)
        }
        Command::Sweep { l_max, data, test, common } => {
            let train = read_csv(&data)?;
            let test = test.as_deref().map(read_csv).transpose()?;
            let run = sweep("custom", train, test, l_max, &common.config(Some(l_max))?)?;
            run.report.write(common.format(), output(common.out.as_deref())?)
        }
        Command::Train { data, experiment, l_max, common } => {
            let train = match (data, experiment) {
                (Some(p), _) => read_csv(&p)?,
                (None, Some(id)) => dataset(id, Split::Train)?,
                (None, None) => unreachable!("clap requires one source"),
            };
            let out = common.out.clone().ok_or_else(|| HarnessError::Argument("train needs --out".into()))?;
            let run = sweep("custom", train, None, l_max, &common.config(Some(l_max))?)?;
            save_model(run.best_model(), &out)?;
            eprintln!(
                "saved L={} model (training RMSE {}) to {}",
                run.report.best_l,
                run.best_model().training_rmse,
                out.display()
            );
            Ok(())
        }
        Command::Predict { model, data, out } => {
            let model = load_model(&model)?;
            let f = File::open(&data).map_err(|e| HarnessError::io(&data, e))?;
            let table = read_input_csv(f)?;
            let pred: Vec<f64> = table.rows().map(|x| model.predict(x)).collect();
            let mut w = csv::Writer::from_writer(output(out.as_deref())?);
            let mut header: Vec<String> = (1..=table.dims).map(|m| format!("x{m}")).collect();
            header.push("prediction".into());
            w.write_record(&header)?;
            for (x, p) in table.rows().zip(&pred) {
                w.write_record(x.iter().chain(std::iter::once(p)).map(f64::to_string))?;
            }
            w.flush().map_err(|e| HarnessError::io("<predictions>", e))?;
            if let Some(y) = &table.targets {
                eprintln!("rmse {}", rmse(&pred, y));
            }
            Ok(())
        }
        Command::ExportPlot { id, l_max, common } => {
            let run = run_experiment(id, &common.config(l_max)?)?;
            write_plot_csv(&run, output(common.out.as_deref())?)
        }
        Command::ExportData { id, split, out } => write_labeled_csv(&dataset(id, split)?, output(out.as_deref())?),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
