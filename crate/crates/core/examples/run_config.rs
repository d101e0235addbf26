//! Loads a TOML run description and runs the experiment it declares, as the
//! `snls` binary does.
//!
//! cargo run --example run_config -- configs/tails.toml

use snls::config::{parse_config, ExperimentKind};
use snls::experiments::run_experiment;

fn main() -> snls::Result<()> {
    let path = std::env::args().nth(1).unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/configs/simulate.toml").into());
    let text = std::fs::read_to_string(&path).map_err(|e| snls::Error::Io { path: path.clone().into(), source: e })?;
    let cfg = parse_config(&text)?;
    let kind = cfg.experiment.unwrap_or(ExperimentKind::Simulate);
    println!("{kind:?}: step suggested by the space-time coupling {:.3e}", cfg.cfl_advisory()?);
    let out = std::env::temp_dir().join("snls-example");
    for file in run_experiment(kind, &cfg, &out)? {
        println!("{}", file.display());
    }
    Ok(())
}
