//! Run configuration: a flat, sectioned TOML document.
//!
//! ```toml
//! experiment = "simulate"
//!
//! [basis]
//! domain = "torus"
//! dim = 1
//! modes = 128
//!
//! [noise]
//! type = "multiplicative"
//! decay_r = 2.0
//! cutoff = 32
//!
//! [scheme]
//! id = "lie-trotter"
//! sigma = 1
//! lambda = -1
//! dt = 1e-3
//! M = 64
//!
//! [run]
//! T = 1.0
//! paths = 100
//! seed = 7
//! ```

use std::path::PathBuf;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::basis::{DomainKind, SpectralBasis};
use crate::error::{Error, Result};
use crate::field::Field;
use crate::noise::{Covariance, NoiseKind, NoiseModel};
use crate::rates::{GronwallParams, TailType};
use crate::schemes::{cfl_max_dt, SchemeConfig, SchemeId, DEFAULT_OVERFLOW};
use crate::tails::TailQuantity;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExperimentKind {
    Simulate,
    Diverge,
    Converge,
    Tails,
    Bounds,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub experiment: Option<ExperimentKind>,
    pub basis: BasisSection,
    #[serde(default)]
    pub noise: NoiseSection,
    pub scheme: SchemeSection,
    pub run: RunSection,
    #[serde(default)]
    pub initial: InitialSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub converge: Option<ConvergeSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tails: Option<TailsSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diverge: Option<DivergeSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bounds: Option<BoundsSection>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BasisSection {
    pub domain: DomainKind,
    #[serde(default = "one")]
    pub dim: usize,
    pub modes: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSection {
    #[serde(rename = "type")]
    pub kind: NoiseKind,
    #[serde(default = "yes")]
    pub real: bool,
    #[serde(default = "two")]
    pub decay_r: f64,
    /// Defaults to `scheme.M`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cutoff: Option<usize>,
    #[serde(default = "unit")]
    pub scale: f64,
}

impl Default for NoiseSection {
    fn default() -> Self {
        NoiseSection {
            kind: NoiseKind::Multiplicative,
            real: true,
            decay_r: 2.0,
            cutoff: None,
            scale: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchemeSection {
    pub id: SchemeId,
    pub sigma: i64,
    pub lambda: f64,
    pub dt: f64,
    #[serde(rename = "M")]
    pub m: usize,
    #[serde(rename = "R", default, skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
    #[serde(default)]
    pub kappa: f64,
    /// Defaults to `(d + 1)/2`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa1: Option<f64>,
    #[serde(default = "half")]
    pub damping_factor: f64,
    /// Defaults to on for `σ = 1`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dealias: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub overflow: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    #[serde(rename = "T")]
    pub horizon: f64,
    #[serde(default = "one")]
    pub paths: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "one")]
    pub stride: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InitialShape {
    /// `Ψ = A e_j` for the mode of Galerkin rank `mode`.
    Mode,
    /// `Ψ_j ∝ (1+λ_j)^{-decay}` on every mode, scaled to `‖Ψ‖ = A`.
    Decay,
    Zero,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialSection {
    #[serde(default = "decay_shape")]
    pub shape: InitialShape,
    /// `‖Ψ‖_{L²}`
    #[serde(default = "unit")]
    pub norm: f64,
    #[serde(default)]
    pub mode: usize,
    #[serde(default = "two")]
    pub decay: f64,
}

impl Default for InitialSection {
    fn default() -> Self {
        InitialSection {
            shape: InitialShape::Decay,
            norm: 1.0,
            mode: 0,
            decay: 2.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConvergeSection {
    /// `"dt:M"` pairs, strictly decreasing in `dt`.
    pub levels: Vec<String>,
    pub ref_dt: f64,
    #[serde(rename = "ref_M")]
    pub ref_m: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TailsSection {
    pub quantity: TailQuantity,
    pub thresholds: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DivergeSection {
    /// Step counts `N` at the fixed horizon.
    pub steps: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundsSection {
    pub tail_types: Vec<TailType>,
    pub epsilons: Vec<f64>,
    #[serde(default)]
    pub params: GronwallParams,
}

fn one() -> usize {
    1
}
fn yes() -> bool {
    true
}
fn two() -> f64 {
    2.0
}
fn unit() -> f64 {
    1.0
}
fn decay_shape() -> InitialShape {
    InitialShape::Decay
}
fn half() -> f64 {
    0.5
}

/// Parses and validates a configuration document.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let cfg: RunConfig = toml::from_str(text).map_err(|e| {
        let line = e.span().map(|s| line_at(text, s.start)).unwrap_or(0);
        let msg = e.message().to_string();
        let key = msg
            .split('`')
            .nth(1)
            .map(str::to_string)
            .unwrap_or_else(|| "<document>".into());
        Error::Parse { line, key, msg }
    })?;
    cfg.validate().map_err(|(section, key, msg)| Error::Parse {
        line: find_key_line(text, section, key),
        key: format!("{section}.{key}"),
        msg,
    })?;
    if let Ok(advisory) = cfg.cfl_advisory() {
        if cfg.scheme.dt > advisory {
            log::info!(
                "dt = {} exceeds the space-time coupling step {advisory:.3e} for M = {}",
                cfg.scheme.dt,
                cfg.scheme.m
            );
        }
    }
    Ok(cfg)
}

/// Serializes a configuration so that `parse_config(render(c)) == c`.
pub fn render(cfg: &RunConfig) -> String {
    toml::to_string(cfg).expect("configuration serializes")
}

fn line_at(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

/// Line of `key = ...` inside `[section]`, or 0 if absent.
fn find_key_line(text: &str, section: &str, key: &str) -> usize {
    let mut current = "";
    for (i, line) in text.lines().enumerate() {
        let t = line.trim();
        if let Some(name) = t.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
            current = name.trim();
            continue;
        }
        if current == section && t.split('=').next().map(str::trim) == Some(key) {
            return i + 1;
        }
    }
    0
}

type Invalid = (&'static str, &'static str, String);

fn ensure(ok: bool, section: &'static str, key: &'static str, msg: impl Into<String>) -> std::result::Result<(), Invalid> {
    if ok {
        Ok(())
    } else {
        Err((section, key, msg.into()))
    }
}

impl RunConfig {
    fn validate(&self) -> std::result::Result<(), Invalid> {
        let b = &self.basis;
        ensure(b.dim == 1 || b.dim == 2, "basis", "dim", "dim must be 1 or 2")?;
        ensure(
            b.modes >= 2 && b.modes.is_power_of_two(),
            "basis",
            "modes",
            "modes must be a power of two >= 2",
        )?;
        ensure(
            !(b.domain == DomainKind::Sine && b.dim == 2),
            "basis",
            "dim",
            "the sine basis is one-dimensional",
        )?;
        let total = b.modes.pow(b.dim as u32);

        let s = &self.scheme;
        ensure(s.sigma >= 1, "scheme", "sigma", "sigma must be a positive integer")?;
        ensure(
            s.lambda == 1.0 || s.lambda == -1.0 || s.lambda == 0.0,
            "scheme",
            "lambda",
            "lambda must be +1 or -1 (0 switches the nonlinearity off)",
        )?;
        ensure(s.dt > 0.0 && s.dt.is_finite(), "scheme", "dt", "dt must be positive")?;
        ensure(s.m >= 1 && s.m <= total, "scheme", "M", format!("M must lie in 1..={total}"))?;
        ensure(
            s.radius.is_none_or(|r| r > 0.0),
            "scheme",
            "R",
            "R must be positive",
        )?;
        ensure(s.kappa >= 0.0, "scheme", "kappa", "kappa must be nonnegative")?;
        ensure(
            s.kappa1.is_none_or(|k| k > b.dim as f64 / 2.0),
            "scheme",
            "kappa1",
            "kappa1 must exceed d/2",
        )?;
        ensure(
            s.damping_factor == 0.5 || s.damping_factor == 1.0,
            "scheme",
            "damping_factor",
            "damping_factor must be 0.5 or 1.0",
        )?;
        ensure(
            s.overflow.is_none_or(|o| o > 0.0),
            "scheme",
            "overflow",
            "overflow threshold must be positive",
        )?;

        let n = &self.noise;
        ensure(n.decay_r.is_finite(), "noise", "decay_r", "decay_r must be finite")?;
        ensure(n.scale >= 0.0, "noise", "scale", "scale must be nonnegative")?;
        ensure(
            n.cutoff.is_none_or(|c| c <= total),
            "noise",
            "cutoff",
            format!("cutoff must not exceed {total}"),
        )?;
        ensure(
            n.real || n.kind == NoiseKind::Additive,
            "noise",
            "real",
            "multiplicative noise must be real-valued",
        )?;

        let r = &self.run;
        ensure(r.horizon > 0.0, "run", "T", "T must be positive")?;
        ensure(r.paths >= 1, "run", "paths", "paths must be at least 1")?;
        ensure(r.stride >= 1, "run", "stride", "stride must be at least 1")?;
        let steps = r.horizon / s.dt;
        ensure(
            (steps - steps.round()).abs() <= 1e-9 * steps.round(),
            "scheme",
            "dt",
            "T / dt must be an integer",
        )?;

        let i = &self.initial;
        ensure(i.norm >= 0.0, "initial", "norm", "norm must be nonnegative")?;
        ensure(i.mode < total, "initial", "mode", format!("mode must be below {total}"))?;

        if let Some(c) = &self.converge {
            ensure(c.levels.len() >= 1, "converge", "levels", "at least one level")?;
            let levels = c.parsed_levels().map_err(|m| ("converge", "levels", m))?;
            ensure(
                levels.windows(2).all(|w| w[0].0 > w[1].0),
                "converge",
                "levels",
                "levels must be strictly decreasing in dt",
            )?;
            ensure(
                levels.iter().all(|&(_, m)| m >= 1 && m <= c.ref_m),
                "converge",
                "levels",
                "every level needs 1 <= M <= ref_M",
            )?;
            ensure(c.ref_dt > 0.0, "converge", "ref_dt", "ref_dt must be positive")?;
            ensure(c.ref_m <= total, "converge", "ref_M", format!("ref_M must not exceed {total}"))?;
        }
        if let Some(t) = &self.tails {
            ensure(
                t.thresholds.windows(2).all(|w| w[0] < w[1]),
                "tails",
                "thresholds",
                "thresholds must be strictly increasing",
            )?;
        }
        if let Some(d) = &self.diverge {
            ensure(
                !d.steps.is_empty() && d.steps.iter().all(|&n| n > 0),
                "diverge",
                "steps",
                "steps must be a nonempty list of positive counts",
            )?;
        }
        if let Some(bd) = &self.bounds {
            ensure(
                bd.epsilons.iter().all(|&e| e >= 0.0),
                "bounds",
                "epsilons",
                "epsilons must be nonnegative",
            )?;
            bd.params
                .validate()
                .map_err(|e| ("bounds", "params", e.to_string()))?;
        }
        Ok(())
    }

    pub fn build_basis(&self) -> Result<Arc<SpectralBasis>> {
        SpectralBasis::new(self.basis.domain, self.basis.dim, self.basis.modes)
    }

    pub fn build_noise(&self, basis: &Arc<SpectralBasis>) -> Result<NoiseModel> {
        let n = &self.noise;
        NoiseModel::new(
            basis,
            &Covariance::Decay {
                r: n.decay_r,
                scale: n.scale,
            },
            n.kind,
            n.real,
            n.cutoff.unwrap_or(self.scheme.m),
        )
    }

    pub fn scheme_config(&self) -> SchemeConfig {
        let s = &self.scheme;
        let sigma = s.sigma as u32;
        SchemeConfig {
            scheme: s.id,
            sigma,
            lambda: s.lambda,
            dt: s.dt,
            m: s.m,
            radius: s.radius.unwrap_or(f64::INFINITY),
            kappa: s.kappa,
            kappa1: s.kappa1.unwrap_or((self.basis.dim as f64 + 1.0) / 2.0),
            horizon: self.run.horizon,
            overflow: s.overflow.unwrap_or(DEFAULT_OVERFLOW),
            damping_factor: s.damping_factor,
            dealias: s.dealias.unwrap_or(sigma == 1),
        }
    }

    pub fn initial_field(&self, basis: &Arc<SpectralBasis>) -> Field {
        let i = &self.initial;
        match i.shape {
            InitialShape::Zero => Field::zeros(basis),
            InitialShape::Mode => Field::single_mode(basis, basis.order()[i.mode], Complex64::new(i.norm, 0.0)),
            InitialShape::Decay => {
                let coeffs: Vec<Complex64> = basis
                    .eigenvalues()
                    .iter()
                    .map(|&l| Complex64::new((1.0 + l).powf(-i.decay), 0.0))
                    .collect();
                let f = Field::from_coeffs(basis, coeffs).expect("one coefficient per mode");
                let n = f.l2();
                f.scale(Complex64::new(i.norm / n, 0.0))
            }
        }
    }

    /// `λ_M^{-(2+2κ₁σ)}`, the step suggested by the space-time coupling.
    pub fn cfl_advisory(&self) -> Result<f64> {
        let basis = self.build_basis()?;
        let sc = self.scheme_config();
        cfl_max_dt(&basis, sc.m, sc.sigma as f64, sc.kappa1, 1.0)
    }

    pub fn output_dir(&self) -> PathBuf {
        self.run.out.clone().unwrap_or_else(|| PathBuf::from("out"))
    }
}

impl ConvergeSection {
    /// The `(dt, M)` pairs.
    pub fn parsed_levels(&self) -> std::result::Result<Vec<(f64, usize)>, String> {
        self.levels
            .iter()
            .map(|s| {
                let (dt, m) = s.split_once(':').ok_or_else(|| format!("level `{s}` is not of the form dt:M"))?;
                let dt: f64 = dt.trim().parse().map_err(|_| format!("level `{s}`: bad dt"))?;
                let m: usize = m.trim().parse().map_err(|_| format!("level `{s}`: bad M"))?;
                if !(dt > 0.0) {
                    return Err(format!("level `{s}`: dt must be positive"));
                }
                Ok((dt, m))
            })
            .collect()
    }
}
