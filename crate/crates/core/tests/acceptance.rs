//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero when a criterion fails that is not listed in `RECORDED_FAILURES`.
//!
//! Run a subset with `cargo test --test acceptance -- 3 9`.

use std::path::Path;
use std::process::Command;
use std::sync::Arc;
use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use snls::functionals::critical_sobolev_ratio;
use snls::harness::{divergence_demo, estimate_strong_error, fit_order, linear_fit, simulate_path, simulate_paths, RecordOptions};
use snls::rates::{bound_rate, check_gronwall_recursion, GronwallParams, GronwallVerdict, Recursion, TailType};
use snls::schemes::cfl_max_dt;
use snls::tails::{estimate_tail, TailQuantity};
use snls::{
    sample_increment, Covariance, DomainKind, Error, Field, IncrementPlan, NoiseKind, NoiseModel, NormKind, SchemeConfig,
    SchemeId, SpectralBasis,
};

/// Criteria whose failure is analysed in the decisions ledger rather than
/// treated as a regression. Their lines still print FAIL.
const RECORDED_FAILURES: [u32; 2] = [2, 5];

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn basis(kind: DomainKind, dim: usize, modes: usize) -> Arc<SpectralBasis> {
    SpectralBasis::new(kind, dim, modes).unwrap()
}

/// `Ψ_j ∝ (1+λ_j)^{-2}` scaled to `‖Ψ‖ = norm`.
fn decay_field(b: &Arc<SpectralBasis>, norm: f64) -> Field {
    let f = Field::from_coeffs(b, b.eigenvalues().iter().map(|&l| c((1.0 + l).powi(-2))).collect()).unwrap();
    let n = f.l2();
    f.scale(c(norm / n))
}

fn multiplicative(b: &Arc<SpectralBasis>, scale: f64, cutoff: usize) -> NoiseModel {
    NoiseModel::new(b, &Covariance::Decay { r: 2.0, scale }, NoiseKind::Multiplicative, true, cutoff).unwrap()
}

fn random_field(b: &Arc<SpectralBasis>, rng: &mut ChaCha8Rng, decay: f64) -> Field {
    let coeffs = b
        .eigenvalues()
        .iter()
        .map(|&l| {
            let z = Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal));
            z * (1.0 + l).powf(-decay)
        })
        .collect();
    Field::from_coeffs(b, coeffs).unwrap()
}

fn mass_monotonicity() -> Outcome {
    let b = basis(DomainKind::Torus, 1, 64);
    let model = multiplicative(&b, 1.0, 64);
    let psi = decay_field(&b, 1.0);
    let mut worst = f64::NEG_INFINITY;
    let mut steps = 0;
    for lambda in [1.0, -1.0] {
        let cfg = SchemeConfig::new(SchemeId::LieTrotter, 1, lambda, 1e-3, 64, 1.0);
        let records = simulate_paths(&cfg, &model, &psi, 1, 100, &RecordOptions::default()).unwrap();
        for r in &records {
            for w in r.rows.windows(2) {
                worst = worst.max(w[1].mass.sqrt() - w[0].mass.sqrt());
                steps += 1;
            }
        }
    }
    outcome(
        worst <= 1e-12,
        format!("largest one-step increase of ||u_n|| = {worst:.2e} over {steps} steps (tolerance 1e-12)"),
    )
}

fn strong_order_in_time() -> Outcome {
    let b = basis(DomainKind::Torus, 1, 128);
    let model = multiplicative(&b, 1.0, 64);
    let psi = decay_field(&b, 1.0);
    let horizon = 0.5;
    let base = SchemeConfig::new(SchemeId::LieTrotter, 1, -1.0, 2e-3, 64, horizon);
    let levels: Vec<SchemeConfig> = [2e-3, 1e-3, 5e-4, 2.5e-4]
        .iter()
        .map(|&dt| SchemeConfig { dt, ..base.clone() })
        .collect();
    let reference = SchemeConfig {
        dt: 2.5e-4 / 16.0,
        m: 128,
        ..base.clone()
    };
    let table = estimate_strong_error(&levels, &reference, &model, &psi, 2024, 200).unwrap();
    let errors: Vec<String> = table.levels.iter().map(|l| format!("{:.3e}", l.rms_error)).collect();
    match table.fit {
        Some(f) => outcome(
            (0.35..=0.65).contains(&f.slope),
            format!(
                "fitted slope {:.3} (95% CI {:.3}..{:.3}), band [0.35, 0.65]; rms errors {}",
                f.slope,
                f.ci.0,
                f.ci.1,
                errors.join(", ")
            ),
        ),
        None => outcome(false, "order fit degenerate"),
    }
}

fn spatial_tail() -> Outcome {
    let b = basis(DomainKind::Sine, 1, 2048);
    let psi = decay_field(&b, 1.0);
    // Σ (1+λ_j)^s |Ψ_j|² with Ψ_j = (1+j²)^{-2} converges iff 2(s−4) < −1
    let constructed = 3.5;
    let ms = [16, 32, 64, 128, 256];
    let lambdas: Vec<f64> = ms.iter().map(|&m| b.lambda_m(m).unwrap()).collect();
    let tails: Vec<f64> = ms
        .iter()
        .map(|&m| {
            let mut rest = psi.clone();
            rest.axpy(c(-1.0), &psi.project(m).unwrap());
            rest.l2()
        })
        .collect();
    let fit = fit_order(&lambdas, &tails).unwrap();
    let s = -2.0 * fit.slope;
    outcome(
        (s - constructed).abs() <= 0.1 * constructed,
        format!("fitted s = {s:.4} against constructed {constructed} (10% band)"),
    )
}

fn divergence_mechanism() -> Outcome {
    let b = basis(DomainKind::Sine, 1, 32);
    let model = multiplicative(&b, 1e-6, 32);
    let psi = decay_field(&b, 100.0);
    let mut cfg = SchemeConfig::new(SchemeId::ExpEuler, 1, 1.0, 0.01, 32, 0.05);
    cfg.dealias = false;
    let explicit = divergence_demo(&cfg, &model, &psi, 4, 20, &[5]).unwrap();
    let split = divergence_demo(
        &SchemeConfig {
            scheme: SchemeId::LieTrotter,
            ..cfg.clone()
        },
        &model,
        &psi,
        4,
        20,
        &[5],
    )
    .unwrap();
    let e = &explicit[0];
    let s = &split[0];
    let certified = e.certificates_checked > 0 && e.certificates_passed == e.certificates_checked && e.min_slack >= -1e-10;
    let pass = certified && e.overflow_frac == 1.0 && s.overflow_frac == 0.0 && s.max_norm.is_finite();
    outcome(
        pass,
        format!(
            "{}/{} certified steps hold (min relative slack {:.3e}); exp-euler overflow fraction {} within 5 steps; splitting overflow fraction {}, max norm {:.3}",
            e.certificates_passed, e.certificates_checked, e.min_slack, e.overflow_frac, s.overflow_frac, s.max_norm
        ),
    )
}

fn heavy_tail_contrast() -> Outcome {
    let b = basis(DomainKind::Torus, 1, 32);
    let model = multiplicative(&b, 1.0, 32);
    let psi = decay_field(&b, 3.5);
    let steps = [50, 100, 200];
    let fractions = |scheme: SchemeId| -> Vec<f64> {
        let cfg = SchemeConfig::new(scheme, 1, 1.0, 0.02, 32, 1.0);
        divergence_demo(&cfg, &model, &psi, 3, 2000, &steps)
            .unwrap()
            .iter()
            .map(|r| r.overflow_frac)
            .collect()
    };
    let mut parts = Vec::new();
    let mut classical_ok = false;
    for scheme in [SchemeId::ExpEuler, SchemeId::SemiMidpoint, SchemeId::SemiEuler] {
        let f = fractions(scheme);
        classical_ok |= f.windows(2).all(|w| w[1] >= w[0]) && f[2] > 0.0;
        parts.push(format!("{scheme} {f:?}"));
    }
    let split = fractions(SchemeId::LieTrotter);
    parts.push(format!("lie-trotter {split:?}"));
    outcome(
        classical_ok && split.iter().all(|&f| f == 0.0),
        format!("overflow fractions at N = {steps:?}: {}", parts.join("; ")),
    )
}

fn h1_stability_under_cfl() -> Outcome {
    let b = basis(DomainKind::Torus, 1, 8);
    let model = multiplicative(&b, 1.0, 8);
    let psi = decay_field(&b, 1.0);
    let kappa1 = 0.75;
    let dt_max = cfl_max_dt(&b, 8, 1.0, kappa1, 1.0).unwrap();
    let dt = 2f64.powi(dt_max.log2().floor() as i32);
    let mut cfg = SchemeConfig::new(SchemeId::LieTrotter, 1, 1.0, dt, 8, 0.5);
    cfg.kappa1 = kappa1;
    let records = simulate_paths(&cfg, &model, &psi, 6, 500, &RecordOptions::summary()).unwrap();
    let diverged = records.iter().filter(|r| r.diverged()).count();
    let sup = records.iter().map(|r| r.sup.h1).fold(0.0, f64::max);
    let bound = 10.0 * psi.norm(NormKind::Sobolev(1.0)) + 10.0 * model.hs_norm(1.0);
    outcome(
        diverged == 0 && sup <= bound,
        format!(
            "dt = {dt:.3e} <= {dt_max:.3e}, {} steps; max ||u_n||_H1 = {sup:.4} against bound {bound:.4}; {diverged} diverged",
            cfg.steps().unwrap()
        ),
    )
}

fn tail_shape() -> Outcome {
    let b = basis(DomainKind::Torus, 1, 32);
    let model = multiplicative(&b, 4.0, 32);
    let psi = decay_field(&b, 1.0);
    let cfg = SchemeConfig::new(SchemeId::LieTrotter, 1, -1.0, 1e-3, 16, 1.0);
    let paths = 10_000;
    let records = simulate_paths(&cfg, &model, &psi, 8, paths, &RecordOptions::summary()).unwrap();
    let mut sups: Vec<f64> = records.iter().map(|r| r.sup.h1).collect();
    sups.sort_by(f64::total_cmp);
    // from the median up to the level exceeded by 10 paths
    let lo = sups[paths / 2];
    let hi = sups[paths - 10];
    let thresholds: Vec<f64> = (0..20).map(|i| lo + (hi - lo) * i as f64 / 19.0).collect();
    let curve = estimate_tail(&records, TailQuantity::SupH1, &thresholds, 1).unwrap();
    match curve.fit {
        Some(f) => outcome(
            f.eta > 0.0 && f.r_squared >= 0.9,
            format!(
                "eta = {:.4}, R^2 = {:.4} over {} thresholds in [{lo:.4}, {hi:.4}]",
                f.eta, f.r_squared, f.points_used
            ),
        ),
        None => outcome(false, "no resolved thresholds"),
    }
}

fn critical_sobolev_probe() -> Outcome {
    let b = basis(DomainKind::Torus, 2, 16);
    let mut rng = ChaCha8Rng::seed_from_u64(88);
    let mut x = Vec::with_capacity(1000);
    let mut y = Vec::with_capacity(1000);
    for _ in 0..1000 {
        let decay = rng.random_range(1.5..3.5);
        let amp = 10f64.powf(rng.random_range(-2.0..2.0));
        let v = random_field(&b, &mut rng, decay).scale(c(amp));
        x.push(v.norm(NormKind::Sobolev(2.0)).ln());
        y.push(critical_sobolev_ratio(&v).unwrap());
    }
    let max = y.iter().copied().fold(0.0, f64::max);
    let fit = linear_fit(&x, &y).unwrap();
    outcome(
        max.is_finite() && fit.ci.0 <= 0.0,
        format!(
            "max ratio {max:.4}; slope vs log||v||_H2 = {:.3e} (95% CI {:.3e}..{:.3e})",
            fit.slope, fit.ci.0, fit.ci.1
        ),
    )
}

fn gronwall_arithmetic() -> Outcome {
    let rel = |v: f64, e: f64| ((v - e) / e).abs();
    // ε + √ε = e^{-8}
    let s = (-1.0 + (1.0 + 4.0 * (-8f64).exp()).sqrt()) / 2.0;
    let poly = bound_rate(
        &GronwallParams {
            epsilon: s * s,
            p1: 4.0,
            ..Default::default()
        },
        TailType::Poly,
    )
    .unwrap();
    let exp = bound_rate(
        &GronwallParams {
            epsilon: 1e-4,
            sigma2: 2.0,
            gamma1: Some(0.1),
            ..Default::default()
        },
        TailType::Exp,
    )
    .unwrap();
    let unit_rejected = [TailType::Poly, TailType::Exp, TailType::LogLog].into_iter().all(|t| {
        let p = GronwallParams {
            epsilon: 1.0,
            sigma2: 2.0,
            gamma1: Some(0.1),
            ..Default::default()
        };
        matches!(bound_rate(&p, t), Err(Error::Domain(_)))
    });
    let examples_ok = rel(poly, 0.5) <= 1e-12 && rel(exp, 1e-4f64.powf(0.9)) <= 1e-12 && unit_rejected;

    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let (mut holds, mut violated, mut rejected) = (0, 0, 0);
    for _ in 0..10_000 {
        let rec = Recursion {
            dt: rng.random_range(1e-3..0.1),
            r1: rng.random_range(0.5..3.0),
            sigma1: rng.random_range(0.5..2.0),
            c: rng.random_range(0.1..2.0),
            c_prime: rng.random_range(0.0..2.0),
            epsilon: 10f64.powf(rng.random_range(-8.0..-1.0)),
            p: rng.random_range(1.0..3.0),
            l: rng.random_range(1.1..3.0),
        };
        let len = rng.random_range(2..200);
        let probs: Vec<f64> = (0..len).map(|_| rng.random_range(0.0..0.2)).collect();
        let beta = rec.forcing(probs.iter().copied().fold(0.0, f64::max));
        let k = rec.growth() * rec.dt;
        let mut a = Vec::with_capacity(len);
        let mut partial = 0.0;
        for n in 0..len {
            let cap = if n == 0 { beta } else { k * partial + beta };
            let v = cap * rng.random_range(0.0..=1.0);
            partial += v;
            a.push(v);
        }
        match check_gronwall_recursion(&a, &rec, &probs).unwrap() {
            GronwallVerdict::Holds { .. } => holds += 1,
            GronwallVerdict::Violated { .. } => violated += 1,
            GronwallVerdict::HypothesisViolated { .. } => rejected += 1,
        }
    }
    outcome(
        examples_ok && violated == 0 && rejected == 0,
        format!(
            "poly {poly:.15} (0.5), exp {exp:.6e} (1e-4^0.9), eps = 1 rejected: {unit_rejected}; random sequences: {holds} hold, {violated} violated, {rejected} not admissible"
        ),
    )
}

fn determinism() -> Outcome {
    let exe = env!("CARGO_BIN_EXE_snls");
    let configs = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs");
    let dir = tempfile::tempdir().unwrap();
    let mut mismatches = Vec::new();
    let mut compared = 0;
    for kind in ["simulate", "diverge", "converge", "tails", "bounds"] {
        let mut outputs = Vec::new();
        for threads in [1, 2, 8] {
            let out = dir.path().join(format!("{kind}-{threads}"));
            let status = Command::new(exe)
                .arg("--threads")
                .arg(threads.to_string())
                .arg("--out")
                .arg(&out)
                .arg(kind)
                .arg(configs.join(format!("{kind}.toml")))
                .env("RUST_LOG", "error")
                .output()
                .unwrap();
            if !status.status.success() {
                return outcome(false, format!("{kind} at {threads} threads failed: {}", String::from_utf8_lossy(&status.stderr)));
            }
            let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(&out)
                .unwrap()
                .map(|e| {
                    let p = e.unwrap().path();
                    (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap())
                })
                .collect();
            files.sort();
            outputs.push(files);
        }
        compared += outputs[0].len();
        if outputs.iter().any(|o| *o != outputs[0]) {
            mismatches.push(kind);
        }
    }
    outcome(
        mismatches.is_empty(),
        format!("{compared} CSV files from five experiments compared at 1, 2 and 8 workers; mismatches: {mismatches:?}"),
    )
}

fn unitarity_and_linear_integration() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(111);
    let bases = [
        basis(DomainKind::Torus, 1, 64),
        basis(DomainKind::Torus, 2, 16),
        basis(DomainKind::Sine, 1, 64),
    ];
    let mut worst_unitary: f64 = 0.0;
    for i in 0..1000 {
        let b = &bases[i % 3];
        let u = random_field(b, &mut rng, 0.5);
        let u = u.clone().scale(c(1.0 / u.l2()));
        let t = rng.random_range(0.0..10.0);
        worst_unitary = worst_unitary.max((u.free_flow(t).l2() - 1.0).abs());
    }

    // additive noise without nonlinearity: both schemes reproduce the mild
    // solution driven by the same increments, with the stochastic convolution
    // sampled at the left (exp-euler) or right (splitting) endpoint
    let b = basis(DomainKind::Torus, 1, 32);
    let model = NoiseModel::new(&b, &Covariance::Decay { r: 1.0, scale: 1.0 }, NoiseKind::Additive, false, 32).unwrap();
    let psi = random_field(&b, &mut rng, 1.0);
    let (m, dt, horizon) = (24, 0.01, 1.0);
    let mut worst_linear: f64 = 0.0;
    for path in 0..10 {
        let plan = IncrementPlan::new(5, path, 100, dt);
        for scheme in [SchemeId::ExpEuler, SchemeId::LieTrotter] {
            let cfg = SchemeConfig::new(scheme, 1, 0.0, dt, m, horizon);
            let got = simulate_path(&cfg, &model, &psi, &plan, 0, &RecordOptions::summary()).unwrap().terminal;
            let mut exact = psi.project(m).unwrap().free_flow(horizon);
            for k in 0..100 {
                let dw = sample_increment(&model, &plan, k, 0).unwrap().project(m).unwrap();
                let t_k = if scheme == SchemeId::ExpEuler { k as f64 * dt } else { (k + 1) as f64 * dt };
                exact.axpy(c(1.0), &dw.free_flow(horizon - t_k));
            }
            exact.axpy(c(-1.0), &got);
            worst_linear = worst_linear.max(exact.l2());
        }
    }
    outcome(
        worst_unitary <= 1e-14 && worst_linear <= 1e-10,
        format!("max | ||S(t)u|| - ||u|| | = {worst_unitary:.2e}; max linear-problem error = {worst_linear:.2e}"),
    )
}

type Criterion = (u32, &'static str, f64, fn() -> Outcome);

const CRITERIA: [Criterion; 11] = [
    (1, "mass monotonicity", 30.0, mass_monotonicity),
    (2, "strong order in time", 600.0, strong_order_in_time),
    (3, "spatial tail", 10.0, spatial_tail),
    (4, "divergence mechanism", 5.0, divergence_mechanism),
    (5, "heavy-tail contrast", 300.0, heavy_tail_contrast),
    (6, "H1 stability under CFL", 120.0, h1_stability_under_cfl),
    (7, "tail shape", 600.0, tail_shape),
    (8, "critical Sobolev probe", 60.0, critical_sobolev_probe),
    (9, "Gronwall arithmetic", 10.0, gronwall_arithmetic),
    (10, "determinism", 60.0, determinism),
    (11, "unitarity and linear integration", 30.0, unitarity_and_linear_integration),
];

fn main() {
    let selected: Vec<u32> = std::env::args()
        .skip(1)
        .filter(|a| !a.starts_with('-'))
        .filter_map(|a| a.parse().ok())
        .collect();
    let mut regressions = Vec::new();
    for (id, name, budget, run) in CRITERIA {
        if !selected.is_empty() && !selected.contains(&id) {
            continue;
        }
        let start = Instant::now();
        let result = run();
        let secs = start.elapsed().as_secs_f64();
        let pass = result.pass && secs < budget;
        let note = if !pass && RECORDED_FAILURES.contains(&id) {
            " [recorded]"
        } else {
            ""
        };
        println!(
            "{} criterion {id} ({name}): {} [{secs:.1} s of {budget} s]{note}",
            if pass { "PASS" } else { "FAIL" },
            result.detail
        );
        if !pass && !RECORDED_FAILURES.contains(&id) {
            regressions.push(id);
        }
    }
    if !regressions.is_empty() {
        eprintln!("unexpected failures: {regressions:?}");
        std::process::exit(1);
    }
}
