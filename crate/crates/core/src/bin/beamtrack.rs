//! Command-line front end: `run`, `trial` and `sweep`.
//!
//! Exit codes: 0 success, 2 configuration error, 3 every trial diverged,
//! 4 I/O error, 1 anything else.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use beamtrack::harness::{
    emit_outputs, run_monte_carlo, run_trial, summarize, trial_seed, ScenarioConfig, Scheme,
};
use beamtrack::Error;
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(
    name = "beamtrack",
    version,
    about = "Radar-assisted beam tracking simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Full Monte Carlo run.
    Run(Common),
    /// One trial with a per-epoch trace on stdout.
    Trial {
        #[command(flatten)]
        common: Common,
        /// Trial index (selects the derived seed).
        #[arg(long, default_value_t = 0)]
        index: usize,
    },
    /// Monte Carlo runs over a list of values for one or more keys, e.g.
    /// `--keys n_tx,n_rx,m_vehicle --values 64,128`.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Config keys set together to each value.
        #[arg(long, value_delimiter = ',', required = true)]
        keys: Vec<String>,
        /// JSON literals.
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<String>,
    },
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides `master_seed`.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Defaults to the config's `schemes` (both unless set).
    #[arg(long, value_enum)]
    scheme: Option<SchemeArg>,
    /// Also write SVG charts.
    #[arg(long)]
    plots: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum SchemeArg {
    Dfrc,
    Feedback,
    Both,
}

enum Failure {
    Config(Error),
    AllDiverged,
    Io(Error),
    Other(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Io { .. } => Failure::Io(e),
            Error::Config(_) | Error::InvalidParameter(_) => Failure::Config(e),
            other => Failure::Other(other),
        }
    }
}

impl Common {
    fn scenario(&self) -> Result<ScenarioConfig, Failure> {
        let mut cfg = match &self.config {
            // A config file that cannot be read is still a config problem.
            Some(path) => ScenarioConfig::load(path).map_err(Failure::Config)?,
            None => ScenarioConfig::default(),
        };
        if let Some(seed) = self.seed {
            cfg.master_seed = seed;
        }
        match self.scheme {
            Some(SchemeArg::Dfrc) => cfg.schemes = vec![Scheme::Dfrc],
            Some(SchemeArg::Feedback) => cfg.schemes = vec![Scheme::Feedback],
            Some(SchemeArg::Both) => cfg.schemes = Scheme::ALL.to_vec(),
            None => {}
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn monte_carlo(cfg: &ScenarioConfig, out: &Path, plots: bool) -> Result<(), Failure> {
    let run = run_monte_carlo(cfg)?;
    emit_outputs(&run.records, &run.summary, out, plots)?;
    for scheme in &cfg.schemes {
        if let Some(t) = run.summary.totals(*scheme) {
            println!(
                "{scheme:>8}: mean |err| {:.4} deg, mean rate {:.3} bit/s/Hz, diverged {}/{}",
                t.mean_abs_err_deg, t.mean_rate_bpshz, t.diverged_trials, t.trials
            );
        }
    }
    if let Some(f) = run.summary.per_scheme.dfrc_better_epoch_fraction {
        println!("radar scheme better in {:.1}% of epochs", 100.0 * f);
    }
    println!("outputs in {}", out.display());
    if run.all_diverged() {
        return Err(Failure::AllDiverged);
    }
    Ok(())
}

fn trial(cfg: &ScenarioConfig, index: usize, out: &Path, plots: bool) -> Result<(), Failure> {
    let mut records = Vec::new();
    let mut diverged = Vec::new();
    for &scheme in &cfg.schemes {
        let outcome = run_trial(cfg, scheme, index, trial_seed(cfg.master_seed, index))?;
        println!("# {scheme}, trial {index}");
        println!("epoch     t_s   theta_deg    est_deg   err_deg   |delta|    rate");
        for r in &outcome.records {
            println!(
                "{:5} {:7.3} {:11.4} {:10.4} {:9.5} {:9.4} {:7.3}{}",
                r.epoch,
                r.t_s,
                r.theta_true_deg,
                r.theta_est_deg,
                r.abs_angle_error_deg(),
                r.abs_delta,
                r.rate_bpshz,
                if r.track_lost { "  track lost" } else { "" }
            );
        }
        if let Some(reason) = &outcome.diverged {
            println!("diverged: {reason}");
            diverged.push((scheme, index));
        }
        records.extend(outcome.records);
    }
    let single = ScenarioConfig {
        trials: 1,
        ..cfg.clone()
    };
    let summary = summarize(&single, &records, &diverged);
    emit_outputs(&records, &summary, out, plots)?;
    if diverged.len() == cfg.schemes.len() {
        return Err(Failure::AllDiverged);
    }
    Ok(())
}

fn sweep(
    base: &ScenarioConfig,
    keys: &[String],
    values: &[String],
    out: &Path,
    plots: bool,
) -> Result<(), Failure> {
    let mut any_ok = false;
    for raw in values {
        let value: serde_json::Value =
            serde_json::from_str(raw).unwrap_or_else(|_| serde_json::Value::String(raw.clone()));
        let mut cfg = base.clone();
        for key in keys {
            cfg = cfg.with_override(key, value.clone())?;
        }
        let dir = out.join(format!("{}={raw}", keys.join("+")));
        println!("== {} = {raw}", keys.join(", "));
        match monte_carlo(&cfg, &dir, plots) {
            Ok(()) => any_ok = true,
            Err(Failure::AllDiverged) => println!("all trials diverged"),
            Err(e) => return Err(e),
        }
    }
    if any_ok {
        Ok(())
    } else {
        Err(Failure::AllDiverged)
    }
}

fn execute(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Run(common) => monte_carlo(&common.scenario()?, &common.out, common.plots),
        Command::Trial { common, index } => {
            trial(&common.scenario()?, index, &common.out, common.plots)
        }
        Command::Sweep {
            common,
            keys,
            values,
        } => sweep(
            &common.scenario()?,
            &keys,
            &values,
            &common.out,
            common.plots,
        ),
    }
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(Failure::AllDiverged) => {
            eprintln!("error: every trial diverged");
            ExitCode::from(3)
        }
        Err(Failure::Io(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(4)
        }
        Err(Failure::Other(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
