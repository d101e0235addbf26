//! Q-Wiener increments: covariance, trace checks, the Itô damping field and
//! the coupling between a coarse step and its fine substeps.

use snls::{aggregate_increments, sample_increment, Covariance, DomainKind, IncrementPlan, NoiseKind, NoiseModel, SpectralBasis};

fn main() -> snls::Result<()> {
    let b = SpectralBasis::new(DomainKind::Torus, 1, 64)?;
    let model = NoiseModel::new(&b, &Covariance::Decay { r: 2.0, scale: 1.0 }, NoiseKind::Multiplicative, true, 32)?;
    for s in [0.0, 1.0, 2.0] {
        let report = model.trace_check(s);
        println!(
            "s = {s}: ||Q^1/2||_HS(H^s) = {:.4}, last-decade growth {:.3}, converged {}",
            model.hs_norm(s),
            report.last_decade_growth,
            report.converged
        );
    }
    println!("sup alpha = {:.6}", model.alpha_sup(1)?);

    // one coarse step of 4·dt equals the sum of its four fine increments
    let plan = IncrementPlan::new(42, 0, 16, 1e-3);
    let coarse = sample_increment(&model, &plan, 1, 2)?;
    let mut summed = snls::Field::zeros(&b);
    for k in 4..8 {
        summed.axpy(num_complex::Complex64::new(1.0, 0.0), &sample_increment(&model, &plan, k, 0)?);
    }
    let mut diff = coarse.clone();
    diff.axpy(num_complex::Complex64::new(-1.0, 0.0), &summed);
    println!("||dW(coarse) - sum of fine|| = {:.1e}", diff.l2());
    println!("same via aggregate_increments: {:.6}", aggregate_increments(&model, &plan, 1, 4)?.l2());

    let mut mean_sq = 0.0;
    let paths = 2000;
    for p in 0..paths {
        let dw = sample_increment(&model, &IncrementPlan::new(7, p, 1, 1e-2), 0, 0)?;
        mean_sq += dw.l2().powi(2) / paths as f64;
    }
    let trace: f64 = model.q().iter().sum();
    println!("E||dW||^2 = {mean_sq:.5e}, dt·Tr Q = {:.5e}", 1e-2 * trace);
    Ok(())
}
