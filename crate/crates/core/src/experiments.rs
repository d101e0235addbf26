//! The five experiments behind the command-line front end. Each writes its
//! CSV files into an output directory and returns their paths.

use std::path::{Path, PathBuf};

use crate::config::{ExperimentKind, RunConfig};
use crate::error::{Error, Result};
use crate::harness::{divergence_demo, estimate_strong_error, simulate_paths, RecordOptions};
use crate::output;
use crate::rates::{bound_rate, GronwallParams, TailType};
use crate::schemes::{SchemeConfig, SchemeId};
use crate::tails::estimate_tail;

const DEFAULT_EPSILONS: [f64; 4] = [1e-2, 1e-4, 1e-8, 1e-16];

pub fn run_experiment(kind: ExperimentKind, cfg: &RunConfig, out: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(out).map_err(|e| Error::Io {
        path: out.to_path_buf(),
        source: e,
    })?;
    match kind {
        ExperimentKind::Simulate => simulate(cfg, out),
        ExperimentKind::Diverge => diverge(cfg, out),
        ExperimentKind::Converge => converge(cfg, out),
        ExperimentKind::Tails => tails(cfg, out),
        ExperimentKind::Bounds => bounds(cfg, out),
    }
}

fn simulate(cfg: &RunConfig, out: &Path) -> Result<Vec<PathBuf>> {
    let basis = cfg.build_basis()?;
    let model = cfg.build_noise(&basis)?;
    let opts = RecordOptions {
        stride: Some(cfg.run.stride),
        ..RecordOptions::default()
    };
    let records = simulate_paths(
        &cfg.scheme_config(),
        &model,
        &cfg.initial_field(&basis),
        cfg.run.seed,
        cfg.run.paths,
        &opts,
    )?;
    let diverged = records.iter().filter(|r| r.diverged()).count();
    if diverged > 0 {
        log::warn!("{diverged} of {} paths overflowed", records.len());
    }
    let path = out.join("diagnostics.csv");
    output::emit_diagnostics(&records, &path)?;
    Ok(vec![path])
}

fn diverge(cfg: &RunConfig, out: &Path) -> Result<Vec<PathBuf>> {
    let basis = cfg.build_basis()?;
    let model = cfg.build_noise(&basis)?;
    let sc = cfg.scheme_config();
    let steps = match &cfg.diverge {
        Some(d) => d.steps.clone(),
        None => vec![sc.steps()?],
    };
    let rows = divergence_demo(&sc, &model, &cfg.initial_field(&basis), cfg.run.seed, cfg.run.paths, &steps)?;
    let path = out.join("diverge.csv");
    output::emit_divergence(&rows, &path)?;
    Ok(vec![path])
}

fn converge(cfg: &RunConfig, out: &Path) -> Result<Vec<PathBuf>> {
    let section = cfg
        .converge
        .as_ref()
        .ok_or_else(|| Error::Config("converge needs a [converge] section".into()))?;
    let basis = cfg.build_basis()?;
    let model = cfg.build_noise(&basis)?;
    let base = cfg.scheme_config();
    let levels: Vec<SchemeConfig> = section
        .parsed_levels()
        .map_err(Error::Config)?
        .into_iter()
        .map(|(dt, m)| SchemeConfig { dt, m, ..base.clone() })
        .collect();
    let reference = SchemeConfig {
        scheme: SchemeId::LieTrotter,
        dt: section.ref_dt,
        m: section.ref_m,
        ..base.clone()
    };
    let table = estimate_strong_error(
        &levels,
        &reference,
        &model,
        &cfg.initial_field(&basis),
        cfg.run.seed,
        cfg.run.paths,
    )?;
    if let Some(f) = table.fit {
        log::info!("fitted order {:.4} (95% CI {:.4}..{:.4})", f.slope, f.ci.0, f.ci.1);
    }
    let path = out.join("converge.csv");
    output::emit_converge(&table, &path)?;
    Ok(vec![path])
}

fn tails(cfg: &RunConfig, out: &Path) -> Result<Vec<PathBuf>> {
    let section = cfg
        .tails
        .as_ref()
        .ok_or_else(|| Error::Config("tails needs a [tails] section".into()))?;
    let basis = cfg.build_basis()?;
    let model = cfg.build_noise(&basis)?;
    let records = simulate_paths(
        &cfg.scheme_config(),
        &model,
        &cfg.initial_field(&basis),
        cfg.run.seed,
        cfg.run.paths,
        &RecordOptions::summary(),
    )?;
    let curve = estimate_tail(&records, section.quantity, &section.thresholds, basis.dim())?;
    let curve_path = out.join("tails.csv");
    let fit_path = out.join("tails_fit.csv");
    output::emit_tails(&curve, &curve_path)?;
    output::emit_tail_fit(&curve, &fit_path)?;
    Ok(vec![curve_path, fit_path])
}

fn bounds(cfg: &RunConfig, out: &Path) -> Result<Vec<PathBuf>> {
    let (types, epsilons, params) = match &cfg.bounds {
        Some(b) => (b.tail_types.clone(), b.epsilons.clone(), b.params),
        None => (
            vec![TailType::Poly, TailType::Exp, TailType::LogLog],
            DEFAULT_EPSILONS.to_vec(),
            GronwallParams::default(),
        ),
    };
    let mut rows = Vec::with_capacity(types.len() * epsilons.len());
    for &t in &types {
        for &epsilon in &epsilons {
            let value = match bound_rate(&GronwallParams { epsilon, ..params }, t) {
                Ok(v) => v,
                Err(Error::Domain(msg)) => {
                    log::warn!("{}: {msg}", t.name());
                    f64::NAN
                }
                Err(e) => return Err(e),
            };
            rows.push((t, epsilon, value));
        }
    }
    let path = out.join("bounds.csv");
    output::emit_bounds(&rows, &path)?;
    Ok(vec![path])
}
