use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use dynalg::cli::{self, exit, Overrides, Report, Settings, Suite};

#[derive(Parser)]
#[command(name = "dynalg", version, about = "Check the dynamical group algebra numerically")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the seeded battery of one suite, or `all`.
    Verify {
        suite: String,
        #[command(flatten)]
        common: Common,
    },
    /// Run a scenario file; without one, every battery.
    Run {
        #[arg(long)]
        config: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    grid_points: Option<usize>,
    /// Half-width of the position box.
    #[arg(long = "box")]
    box_half: Option<f64>,
    #[arg(long)]
    k_track: Option<usize>,
    #[arg(long)]
    tolerance_scale: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Directory for records.tsv and summary.txt.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Record wall times in records.tsv (breaks byte-identical output).
    #[arg(long)]
    timings: bool,
}

impl Common {
    fn overrides(&self) -> Overrides {
        Overrides {
            grid_points: self.grid_points,
            box_half: self.box_half,
            k_track: self.k_track,
            tolerance_scale: self.tolerance_scale,
            seed: self.seed,
        }
    }
}

fn execute(command: &Command) -> dynalg::Result<(Report, &Common)> {
    match command {
        Command::Verify { suite, common } => {
            let suites = if suite == "all" {
                Suite::ALL.to_vec()
            } else {
                vec![suite.parse()?]
            };
            let settings = Settings::default().apply(&common.overrides())?;
            Ok((cli::verify(&suites, &settings)?, common))
        }
        Command::Run { config: Some(path), common } => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| dynalg::Error::Io(format!("{}: {e}", path.display())))?;
            Ok((cli::run_config_text(&text, &common.overrides())?, common))
        }
        Command::Run { config: None, common } => {
            let settings = Settings::default().apply(&common.overrides())?;
            Ok((cli::verify(&Suite::ALL, &settings)?, common))
        }
    }
}

fn main() -> ExitCode {
    let args = Cli::parse();
    let (report, common) = match execute(&args.command) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("dynalg: {e}");
            return ExitCode::from(cli::exit_code(&e) as u8);
        }
    };
    print!("{}", report.table(common.timings));
    if let Some(dir) = &common.output {
        if let Err(e) = report.write(dir, common.timings) {
            eprintln!("dynalg: {e}");
            return ExitCode::from(exit::CONFIG as u8);
        }
    }
    ExitCode::from(if report.all_pass() { exit::PASS } else { exit::CHECK_FAILED } as u8)
}
