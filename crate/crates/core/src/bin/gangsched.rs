use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use gangsched::experiment::{
    analyze_file, averaged_path, run_case_study, run_grid, simulate_file, summary, write_generated, CaseStudy,
    ExperimentGrid, Scenario, SimulateMode,
};
use gangsched::gang::GangTestRegistry;
use gangsched::generate::{Card, GenSpec, VolumeLevel};
use gangsched::model::{SchedulerKind, Time};
use gangsched::partition::PartitionerConfig;

/// Schedulability analysis for sporadic rigid gang tasks.
#[derive(Parser)]
#[command(name = "gangsched", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Output file or directory.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    sets_per_cell: Option<usize>,
    /// Comma-separated test names such as `SP-U(FP-P),SP-G(FP-NP)`.
    #[arg(long, value_delimiter = ',')]
    tests: Vec<String>,
    /// 1000 sets per cell.
    #[arg(long)]
    paper_scale: bool,
}

impl Common {
    fn tests(&self) -> Result<Option<Vec<PartitionerConfig>>, String> {
        if self.tests.is_empty() {
            return Ok(None);
        }
        self.tests
            .iter()
            .map(|t| t.parse::<PartitionerConfig>().map_err(|e| e.to_string()))
            .collect::<Result<Vec<_>, _>>()
            .map(Some)
    }

    fn sets(&self, desk: usize) -> usize {
        match (self.sets_per_cell, self.paper_scale) {
            (Some(n), _) => n,
            (None, true) => gangsched::experiment::FULL_SETS_PER_CELL,
            (None, false) => desk,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Write generated task-set files.
    Gen {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 8)]
        processors: u32,
        /// Number of tasks (default: the processor count).
        #[arg(long)]
        tasks: Option<usize>,
        #[arg(long, default_value = "medium")]
        level: String,
        #[arg(long, default_value_t = 0.5)]
        util: f64,
        #[arg(long, default_value_t = 1)]
        count: usize,
    },
    /// Analyze one task-set file.
    Analyze {
        #[command(flatten)]
        common: Common,
        file: PathBuf,
    },
    /// Sweep the synthetic grid.
    Grid {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "preemptive")]
        scenario: String,
    },
    /// Run the Edge TPU case study.
    Casestudy {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "tpu8")]
        card: String,
    },
    /// Simulate one task-set file and export the trace as CSV.
    Simulate {
        #[command(flatten)]
        common: Common,
        file: PathBuf,
        /// Schedule all tasks globally with this scheduler, e.g. `gang-fp-np`.
        #[arg(long)]
        global: Option<String>,
        #[arg(long)]
        horizon: Option<Time>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode, String> {
    let registry = GangTestRegistry::new();
    match cli.command {
        Command::Gen {
            common,
            processors,
            tasks,
            level,
            util,
            count,
        } => {
            let level: VolumeLevel = level.parse().map_err(|e| format!("{e}"))?;
            let spec = GenSpec::new(processors, tasks.unwrap_or(processors as usize), level, util, common.seed);
            let dir = common.out.unwrap_or_else(|| PathBuf::from("tasksets"));
            let paths = write_generated(&spec, count, &dir).map_err(|e| e.to_string())?;
            for p in paths {
                println!("{}", p.display());
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Analyze { common, file } => {
            let config = match common.tests()? {
                Some(mut tests) if tests.len() == 1 => tests.remove(0),
                Some(_) => return Err("analyze takes exactly one test".into()),
                None => "SP-U(FP-P)".parse().expect("built-in test name"),
            };
            let status = analyze_file(
                &file,
                &config,
                &registry,
                &mut std::io::stdout(),
                &mut std::io::stderr(),
            );
            Ok(ExitCode::from(status.code() as u8))
        }
        Command::Grid { common, scenario } => {
            let scenario: Scenario = scenario.parse().map_err(|e| format!("{e}"))?;
            let mut grid = ExperimentGrid::desk(scenario, common.seed);
            grid.sets_per_cell = common.sets(grid.sets_per_cell);
            if let Some(tests) = common.tests()? {
                grid.tests = tests;
            }
            let out = common.out.clone().unwrap_or_else(|| PathBuf::from("grid.csv"));
            let report = run_grid(&grid, &registry, &out).map_err(|e| e.to_string())?;
            print!("{}", summary(&report));
            eprintln!("wrote {} and {}", out.display(), averaged_path(&out).display());
            Ok(ExitCode::SUCCESS)
        }
        Command::Casestudy { common, card } => {
            let card: Card = card.parse().map_err(|e| format!("{e}"))?;
            let mut study = CaseStudy::new(card, common.seed);
            study.sets_per_util = common.sets(study.sets_per_util);
            if let Some(tests) = common.tests()? {
                study.tests = tests;
            }
            let out = common
                .out
                .clone()
                .unwrap_or_else(|| PathBuf::from(format!("casestudy_{}.csv", card.as_str())));
            let report = run_case_study(&study, &registry, &out).map_err(|e| e.to_string())?;
            print!("{}", summary(&report));
            eprintln!("wrote {}", out.display());
            Ok(ExitCode::SUCCESS)
        }
        Command::Simulate {
            common,
            file,
            global,
            horizon,
        } => {
            let mode = match global {
                Some(kind) => SimulateMode::Global(kind.parse::<SchedulerKind>().map_err(|e| e.to_string())?),
                None => SimulateMode::Partitioned(match common.tests()? {
                    Some(mut tests) if tests.len() == 1 => tests.remove(0),
                    Some(_) => return Err("simulate takes exactly one test".into()),
                    None => "SP-U(FP-P)".parse().expect("built-in test name"),
                }),
            };
            let trace = simulate_file(&file, &mode, horizon, &registry).map_err(|e| e.to_string())?;
            let csv = trace.to_csv();
            match &common.out {
                Some(path) => std::fs::write(path, csv).map_err(|e| format!("{}: {e}", path.display()))?,
                None => print!("{csv}"),
            }
            Ok(if trace.is_schedulable() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
    }
}
