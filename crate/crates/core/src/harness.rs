//! Monte Carlo driver: single trajectories, coupled multi-level runs for strong
//! errors, order fits and divergence statistics.
//!
//! Paths run in parallel on the current rayon pool. Results are collected in
//! path-index order and reduced sequentially, so every table is independent
//! of the worker count.

use num_complex::Complex64;
use rayon::prelude::*;
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};
use crate::field::{Field, NormKind};
use crate::functionals::{log_log_u, DiagnosticsRow, LogLogVariant};
use crate::noise::{IncrementPlan, NoiseKind, NoiseModel};
use crate::schemes::{blowup_certificate, cfl_max_dt, SchemeConfig, SchemeId, Stepper};

/// What to keep from a trajectory besides its terminal state and suprema.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RecordOptions {
    /// Record a diagnostics row every `stride` steps (and at the last step).
    /// `None` keeps no rows.
    pub stride: Option<usize>,
    /// Sobolev index of the Lyapunov functional in the rows.
    pub lyapunov: Option<u32>,
    /// Keep the running supremum of `‖u_k‖_{ℍ¹}` after every step.
    pub running: bool,
}

impl Default for RecordOptions {
    fn default() -> Self {
        RecordOptions {
            stride: Some(1),
            lyapunov: None,
            running: false,
        }
    }
}

impl RecordOptions {
    /// Terminal state and suprema only.
    pub fn summary() -> Self {
        RecordOptions {
            stride: None,
            lyapunov: None,
            running: false,
        }
    }
}

/// Running suprema over the realized steps.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Suprema {
    pub l2: f64,
    pub h1: f64,
    pub linf: f64,
    pub utilde: f64,
}

impl Suprema {
    fn update(&mut self, u: &Field) {
        self.l2 = self.l2.max(u.l2());
        self.h1 = self.h1.max(u.norm(NormKind::Sobolev(1.0)));
        self.linf = self.linf.max(u.norm(NormKind::Linf));
        self.utilde = self.utilde.max(log_log_u(u, LogLogVariant::Laplacian));
    }
}

#[derive(Debug, Clone)]
pub struct PathRecord {
    pub path: u64,
    pub rows: Vec<DiagnosticsRow>,
    pub terminal: Field,
    /// Step at which the state first exceeded the overflow threshold.
    pub first_overflow: Option<usize>,
    /// Suprema over the steps before overflow.
    pub sup: Suprema,
    /// `sup_{k≤n} ‖u_k‖_{ℍ¹}` for `n = 0..=N` (empty unless requested).
    pub running_h1: Vec<f64>,
}

impl PathRecord {
    pub fn diverged(&self) -> bool {
        self.first_overflow.is_some()
    }

    /// Whether the path lies in `{sup_{k≤n} ‖u_k‖_{ℍ¹} ≤ r}`.
    pub fn in_truncation_event(&self, r: f64, n: usize) -> Result<bool> {
        let sup = self
            .running_h1
            .get(n)
            .ok_or_else(|| Error::Range(format!("step {n} not recorded (running suprema kept for {} steps)", self.running_h1.len())))?;
        Ok(*sup <= r)
    }
}

/// Ratio `coarse/fine` as an integer, or a configuration error.
fn refinement(coarse: f64, fine: f64) -> Result<usize> {
    let r = coarse / fine;
    let n = r.round();
    if n < 1.0 || (r - n).abs() > 1e-9 * n {
        return Err(Error::config(format!("step {coarse} is not a multiple of the driving step {fine}")));
    }
    Ok(n as usize)
}

/// Runs the configured scheme from `P^M Ψ` over the horizon, driven by the
/// plan's fine increments summed `2^level` at a time.
pub fn simulate_path(
    cfg: &SchemeConfig,
    model: &NoiseModel,
    psi: &Field,
    plan: &IncrementPlan,
    level: u32,
    opts: &RecordOptions,
) -> Result<PathRecord> {
    let stepper = Stepper::new(cfg, model)?;
    let n_steps = cfg.steps()?;
    let r = 1usize << level;
    if plan.fine_steps != n_steps * r || refinement(cfg.dt, plan.fine_dt)? != r {
        return Err(Error::config(format!(
            "plan of {} steps of {} does not drive {n_steps} steps of {} at level {level}",
            plan.fine_steps, plan.fine_dt, cfg.dt
        )));
    }
    if opts.stride == Some(0) {
        return Err(Error::config("stride must be positive"));
    }
    let basis = model.basis();
    let mut u = psi.project(cfg.m)?;
    let mut record = PathRecord {
        path: plan.path,
        rows: Vec::new(),
        terminal: Field::zeros(basis),
        first_overflow: None,
        sup: Suprema::default(),
        running_h1: Vec::new(),
    };
    let observe = |u: &Field, n: usize, record: &mut PathRecord| {
        if !u.is_overflow() {
            record.sup.update(u);
        }
        if opts.running {
            record.running_h1.push(record.sup.h1);
        }
        if let Some(stride) = opts.stride {
            if n % stride == 0 || n == n_steps || u.is_overflow() {
                record
                    .rows
                    .push(DiagnosticsRow::evaluate(u, n, cfg.dt, cfg.sigma, cfg.lambda, opts.lyapunov));
            }
        }
    };
    observe(&u, 0, &mut record);

    let mut stream = plan.stream(model);
    let mut xi = vec![Complex64::new(0.0, 0.0); basis.mode_count()];
    let mut dw = Field::zeros(basis);
    for n in 1..=n_steps {
        xi.iter_mut().for_each(|v| *v = Complex64::new(0.0, 0.0));
        for _ in 0..r {
            let fine = stream.next_standard().expect("plan length checked");
            xi.iter_mut().zip(fine).for_each(|(a, b)| *a += b);
        }
        model.scale_increment(&xi, plan.fine_dt, dw.coeffs_mut());
        u = stepper.step(&u, &dw);
        observe(&u, n, &mut record);
        if u.is_overflow() {
            record.first_overflow = Some(n);
            if opts.running {
                let last = record.sup.h1;
                record.running_h1.resize(n_steps + 1, last);
            }
            break;
        }
    }
    record.terminal = u;
    Ok(record)
}

/// Runs `n_paths` independent paths at level 0, paths `0..n_paths` of `seed`.
pub fn simulate_paths(
    cfg: &SchemeConfig,
    model: &NoiseModel,
    psi: &Field,
    seed: u64,
    n_paths: usize,
    opts: &RecordOptions,
) -> Result<Vec<PathRecord>> {
    let n_steps = cfg.steps()?;
    (0..n_paths as u64)
        .into_par_iter()
        .map(|p| simulate_path(cfg, model, psi, &IncrementPlan::new(seed, p, n_steps, cfg.dt), 0, opts))
        .collect()
}

/// Terminal states of several configurations driven by the same path of
/// fine increments, one step of size `fine_dt` being the finest step.
/// Returns `None` for a configuration whose trajectory overflowed.
pub fn simulate_coupled(
    cfgs: &[SchemeConfig],
    model: &NoiseModel,
    psi: &Field,
    plan: &IncrementPlan,
) -> Result<Vec<Option<Field>>> {
    let basis = model.basis();
    let mut lanes = Vec::with_capacity(cfgs.len());
    for cfg in cfgs {
        let r = refinement(cfg.dt, plan.fine_dt)?;
        if cfg.steps()? * r != plan.fine_steps {
            return Err(Error::config(format!(
                "configuration with dt = {} does not span the {} driving steps",
                cfg.dt, plan.fine_steps
            )));
        }
        lanes.push((Stepper::new(cfg, model)?, r, psi.project(cfg.m)?, vec![Complex64::new(0.0, 0.0); basis.mode_count()]));
    }
    let mut stream = plan.stream(model);
    let mut dw = Field::zeros(basis);
    for k in 1..=plan.fine_steps {
        let fine = stream.next_standard().expect("plan length");
        for (stepper, r, u, acc) in lanes.iter_mut() {
            acc.iter_mut().zip(fine).for_each(|(a, b)| *a += b);
            if k % *r == 0 {
                model.scale_increment(acc, plan.fine_dt, dw.coeffs_mut());
                *u = stepper.step(u, &dw);
                acc.iter_mut().for_each(|v| *v = Complex64::new(0.0, 0.0));
            }
        }
    }
    Ok(lanes
        .into_iter()
        .map(|(_, _, u, _)| if u.is_overflow() { None } else { Some(u) })
        .collect())
}

/// Least-squares line through `(log δt, log error)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrderFit {
    pub slope: f64,
    pub intercept: f64,
    /// 95% confidence interval of the slope.
    pub ci: (f64, f64),
    pub r_squared: f64,
}

/// Fits `log y = intercept + slope·log x`.
pub fn fit_order(dts: &[f64], errors: &[f64]) -> Result<OrderFit> {
    if dts.len() != errors.len() {
        return Err(Error::Shape {
            expected: dts.len(),
            actual: errors.len(),
        });
    }
    if dts.len() < 3 {
        return Err(Error::DegenerateFit(format!("{} levels, at least 3 needed", dts.len())));
    }
    if errors.iter().any(|&e| !(e > 0.0) || !e.is_finite()) || dts.iter().any(|&d| !(d > 0.0)) {
        return Err(Error::DegenerateFit("errors and steps must be positive and finite".into()));
    }
    let x: Vec<f64> = dts.iter().map(|d| d.ln()).collect();
    let y: Vec<f64> = errors.iter().map(|e| e.ln()).collect();
    let line = linear_fit(&x, &y)?;
    Ok(OrderFit {
        slope: line.slope,
        intercept: line.intercept,
        ci: line.ci,
        r_squared: line.r_squared,
    })
}

/// Ordinary least squares `y ≈ intercept + slope·x` with a 95% slope interval.
pub fn linear_fit(x: &[f64], y: &[f64]) -> Result<OrderFit> {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::DegenerateFit("all abscissae coincide".into()));
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = x.iter().zip(y).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum();
    let syy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    let r_squared = if syy == 0.0 { 1.0 } else { 1.0 - sse / syy };
    let dof = n - 2.0;
    let half = if dof > 0.0 {
        let t = StudentsT::new(0.0, 1.0, dof).expect("positive dof").inverse_cdf(0.975);
        t * (sse / dof / sxx).sqrt()
    } else {
        0.0
    };
    Ok(OrderFit {
        slope,
        intercept,
        ci: (slope - half, slope + half),
        r_squared,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct LevelError {
    pub dt: f64,
    pub m: usize,
    pub lambda_m: f64,
    /// `(mean ‖P^M u_ref(T) − u(T)‖²)^{1/2}`
    pub rms_error: f64,
    /// Standard error of `rms_error` (delta method).
    pub std_error: f64,
    pub n_paths: usize,
    /// `δt > λ_M^{-(2+2κ₁σ)}`
    pub cfl_violation: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ErrorTable {
    pub levels: Vec<LevelError>,
    pub reference_dt: f64,
    pub reference_m: usize,
    /// Order fit over the levels, when there are at least three and the fit
    /// is not degenerate.
    pub fit: Option<OrderFit>,
}

/// Strong errors of `levels` against the coupled `reference`, all driven by
/// the same increments of paths `0..n_paths` of `seed`.
pub fn estimate_strong_error(
    levels: &[SchemeConfig],
    reference: &SchemeConfig,
    model: &NoiseModel,
    psi: &Field,
    seed: u64,
    n_paths: usize,
) -> Result<ErrorTable> {
    if levels.is_empty() || n_paths == 0 {
        return Err(Error::config("need at least one level and one path"));
    }
    if levels.windows(2).any(|w| !(w[0].dt > w[1].dt)) {
        return Err(Error::config("levels must be strictly ordered by decreasing dt"));
    }
    let n_ref = reference.steps()?;
    for (i, l) in levels.iter().enumerate() {
        if l.m > reference.m {
            return Err(Error::config(format!("level {i} has M = {} above the reference M = {}", l.m, reference.m)));
        }
        if (l.horizon - reference.horizon).abs() > 1e-12 * reference.horizon {
            return Err(Error::config(format!("level {i} horizon differs from the reference")));
        }
        refinement(l.dt, reference.dt)?;
    }
    let mut cfgs = levels.to_vec();
    cfgs.push(reference.clone());

    let per_path: Vec<Vec<Option<f64>>> = (0..n_paths as u64)
        .into_par_iter()
        .map(|p| -> Result<Vec<Option<f64>>> {
            let plan = IncrementPlan::new(seed, p, n_ref, reference.dt);
            let finals = simulate_coupled(&cfgs, model, psi, &plan)?;
            let (reference_final, level_finals) = finals.split_last().expect("reference present");
            Ok(level_finals
                .iter()
                .zip(levels)
                .map(|(u, cfg)| match (u, reference_final) {
                    (Some(u), Some(r)) => {
                        let mut diff = r.project(cfg.m).expect("M checked");
                        diff.axpy(Complex64::new(-1.0, 0.0), u);
                        Some(diff.l2().powi(2))
                    }
                    _ => None,
                })
                .collect())
        })
        .collect::<Result<_>>()?;

    let mut rows = Vec::with_capacity(levels.len());
    for (i, cfg) in levels.iter().enumerate() {
        let diverged = per_path.iter().filter(|p| p[i].is_none()).count();
        if diverged > 0 {
            return Err(Error::Diverged {
                level: i,
                diverged,
                paths: n_paths,
            });
        }
        let sq: Vec<f64> = per_path.iter().map(|p| p[i].expect("checked")).collect();
        let n = n_paths as f64;
        let mean = sq.iter().sum::<f64>() / n;
        let var = if n_paths > 1 {
            sq.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (n - 1.0)
        } else {
            0.0
        };
        let rms = mean.sqrt();
        let std_error = if rms > 0.0 { (var / n).sqrt() / (2.0 * rms) } else { 0.0 };
        let basis = model.basis();
        rows.push(LevelError {
            dt: cfg.dt,
            m: cfg.m,
            lambda_m: basis.lambda_m(cfg.m)?,
            rms_error: rms,
            std_error,
            n_paths,
            cfl_violation: cfg.dt > cfl_max_dt(basis, cfg.m, cfg.sigma as f64, cfg.kappa1, 1.0)?,
        });
    }
    let fit = if rows.len() >= 3 {
        let dts: Vec<f64> = rows.iter().map(|r| r.dt).collect();
        let errs: Vec<f64> = rows.iter().map(|r| r.rms_error).collect();
        fit_order(&dts, &errs).ok()
    } else {
        None
    };
    Ok(ErrorTable {
        levels: rows,
        reference_dt: reference.dt,
        reference_m: reference.m,
        fit,
    })
}

/// One row of the divergence experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct DivergenceRow {
    pub n: usize,
    pub overflow_frac: f64,
    /// `E‖u_N‖²` over the paths that did not overflow (NaN if none).
    pub cond_moment2: f64,
    pub max_norm: f64,
    /// Steps with a positive certificate whose noise stayed below `δt‖u_n‖`.
    pub certificates_checked: usize,
    pub certificates_passed: usize,
    /// Smallest relative slack `(‖u_{n+1}‖ − certificate)/certificate` seen.
    pub min_slack: f64,
}

/// Per-step audit of the one-step blow-up inequality.
#[derive(Debug, Clone, Copy, PartialEq)]
struct CertificateTally {
    checked: usize,
    passed: usize,
    min_slack: f64,
}

/// Relative slack tolerated by the certificate check.
pub const CERTIFICATE_TOLERANCE: f64 = 1e-10;

fn run_divergence_path(
    cfg: &SchemeConfig,
    model: &NoiseModel,
    psi: &Field,
    plan: &IncrementPlan,
) -> Result<(Field, CertificateTally, f64)> {
    let stepper = Stepper::new(cfg, model)?;
    let alpha_sup = model.alpha_sup(stepper.padding())?;
    let measure = model.basis().measure();
    let certify = cfg.scheme == SchemeId::ExpEuler;
    let mut tally = CertificateTally {
        checked: 0,
        passed: 0,
        min_slack: f64::INFINITY,
    };
    let mut u = psi.project(cfg.m)?;
    let mut max_norm = u.l2();
    let mut stream = plan.stream(model);
    let mut dw = Field::zeros(model.basis());
    while let Some(xi) = stream.next_standard() {
        model.scale_increment(xi, plan.fine_dt, dw.coeffs_mut());
        let norm = u.l2();
        let cert = blowup_certificate(norm, cfg.dt, cfg.sigma as f64, alpha_sup, measure);
        let next = stepper.step(&u, &dw);
        if certify && cert > 0.0 && noise_term_norm(&u, &dw, model) <= cfg.dt * norm {
            tally.checked += 1;
            let slack = (next.l2() - cert) / cert;
            tally.min_slack = tally.min_slack.min(slack);
            if slack >= -CERTIFICATE_TOLERANCE {
                tally.passed += 1;
            }
        }
        u = next;
        if u.is_overflow() {
            max_norm = f64::INFINITY;
            break;
        }
        max_norm = max_norm.max(u.l2());
    }
    Ok((u, tally, max_norm))
}

/// `‖g(u)δW‖` by grid quadrature.
fn noise_term_norm(u: &Field, dw: &Field, model: &NoiseModel) -> f64 {
    match model.kind() {
        NoiseKind::Additive => dw.l2(),
        NoiseKind::Multiplicative => {
            let w = model.basis().grid(1).expect("unpadded grid").weight();
            u.to_grid(1)
                .iter()
                .zip(dw.to_grid(1))
                .map(|(a, b)| w * (a * b).norm_sqr())
                .sum::<f64>()
                .sqrt()
        }
    }
}

/// Overflow fraction, conditional second moment and certificate audit at
/// each step count in `n_list`, with the horizon of `cfg` fixed.
pub fn divergence_demo(
    cfg: &SchemeConfig,
    model: &NoiseModel,
    psi: &Field,
    seed: u64,
    n_paths: usize,
    n_list: &[usize],
) -> Result<Vec<DivergenceRow>> {
    if n_paths == 0 {
        return Err(Error::config("need at least one path"));
    }
    let mut rows = Vec::with_capacity(n_list.len());
    for &n in n_list {
        if n == 0 {
            return Err(Error::config("step counts must be positive"));
        }
        let level_cfg = SchemeConfig {
            dt: cfg.horizon / n as f64,
            ..cfg.clone()
        };
        let results: Vec<(Field, CertificateTally, f64)> = (0..n_paths as u64)
            .into_par_iter()
            .map(|p| run_divergence_path(&level_cfg, model, psi, &IncrementPlan::new(seed, p, n, level_cfg.dt)))
            .collect::<Result<_>>()?;
        let overflowed = results.iter().filter(|r| r.0.is_overflow()).count();
        let survivors: Vec<f64> = results
            .iter()
            .filter(|r| !r.0.is_overflow())
            .map(|r| r.0.l2().powi(2))
            .collect();
        let cond_moment2 = if survivors.is_empty() {
            f64::NAN
        } else {
            survivors.iter().sum::<f64>() / survivors.len() as f64
        };
        rows.push(DivergenceRow {
            n,
            overflow_frac: overflowed as f64 / n_paths as f64,
            cond_moment2,
            max_norm: results.iter().map(|r| r.2).fold(0.0, f64::max),
            certificates_checked: results.iter().map(|r| r.1.checked).sum(),
            certificates_passed: results.iter().map(|r| r.1.passed).sum(),
            min_slack: results.iter().map(|r| r.1.min_slack).fold(f64::INFINITY, f64::min),
        });
    }
    Ok(rows)
}
