use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use mceif_cli::spec::{read_config, DmlMoment, Experiment, ExperimentSpec};
use mceif_cli::CliError;

/// Monte Carlo efficient influence function experiments.
#[derive(Parser, Debug)]
#[command(version, about)]
struct Args {
    experiment: Experiment,
    #[arg(long)]
    seed: Option<u64>,
    /// Monte Carlo samples for the Fisher and gradient estimates.
    #[arg(long)]
    m: Option<usize>,
    /// Observations per simulated dataset.
    #[arg(long)]
    n: Option<usize>,
    /// Confounders in the causal model.
    #[arg(long)]
    f: Option<usize>,
    /// Assets in the portfolio experiment.
    #[arg(long)]
    d: Option<usize>,
    #[arg(long)]
    replicates: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// key=value file; flags given on the command line win.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_name = "LIST")]
    m_grid: Option<String>,
    #[arg(long, value_name = "LIST")]
    f_grid: Option<String>,
    #[arg(long)]
    save_datasets: bool,
    #[arg(long, value_enum)]
    dml_moment: Option<DmlMoment>,
}

fn overrides(args: &Args) -> Result<BTreeMap<String, String>, CliError> {
    let mut o = match &args.config {
        Some(path) => read_config(path)?,
        None => BTreeMap::new(),
    };
    let mut put = |k: &str, v: Option<String>| {
        if let Some(v) = v {
            o.insert(k.to_owned(), v);
        }
    };
    put("seed", args.seed.map(|v| v.to_string()));
    put("m", args.m.map(|v| v.to_string()));
    put("n", args.n.map(|v| v.to_string()));
    put("f", args.f.map(|v| v.to_string()));
    put("d", args.d.map(|v| v.to_string()));
    put("replicates", args.replicates.map(|v| v.to_string()));
    put("out", args.out.as_ref().map(|p| p.display().to_string()));
    put("m-grid", args.m_grid.clone());
    put("f-grid", args.f_grid.clone());
    put("save-datasets", args.save_datasets.then(|| "true".to_owned()));
    put(
        "dml-moment",
        args.dml_moment
            .and_then(|m| clap::ValueEnum::to_possible_value(&m))
            .map(|v| v.get_name().to_owned()),
    );
    Ok(o)
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let msg = e.to_string();
            eprintln!("error: {}", msg.lines().next().unwrap_or("invalid arguments").trim_start_matches("error: "));
            return ExitCode::from(1);
        }
    };
    let result = overrides(&args)
        .and_then(|o| ExperimentSpec::build(args.experiment, &o))
        .and_then(|spec| mceif_cli::run(&spec).map(|s| (spec, s)));
    match result {
        Ok((spec, summary)) => {
            println!(
                "{}: {} aggregates written to {}",
                summary.experiment,
                summary.aggregates.len(),
                spec.out.display()
            );
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
