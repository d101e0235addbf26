//! Tail probabilities of the H1 supremum with Wilson intervals and a
//! Gaussian-shape fit.

use snls::harness::{simulate_paths, RecordOptions};
use snls::tails::{estimate_tail, TailQuantity};
use snls::{Covariance, DomainKind, Field, NoiseKind, NoiseModel, SchemeConfig, SchemeId, SpectralBasis};

fn main() -> snls::Result<()> {
    let b = SpectralBasis::new(DomainKind::Torus, 1, 32)?;
    let model = NoiseModel::new(&b, &Covariance::Decay { r: 2.0, scale: 4.0 }, NoiseKind::Multiplicative, true, 32)?;
    let psi = Field::single_mode(&b, b.order()[0], num_complex::Complex64::new(1.0, 0.0));
    let cfg = SchemeConfig::new(SchemeId::LieTrotter, 1, -1.0, 1e-3, 16, 0.25);
    let records = simulate_paths(&cfg, &model, &psi, 8, 2000, &RecordOptions::summary())?;
    let thresholds: Vec<f64> = (0..14).map(|i| 1.0 + 0.025 * i as f64).collect();
    let curve = estimate_tail(&records, TailQuantity::SupH1, &thresholds, 1)?;
    for p in &curve.points {
        println!("R {:.3}  p {:.4}  [{:.4}, {:.4}]", p.r, p.p_hat, p.wilson_lo, p.wilson_hi);
    }
    match curve.fit {
        Some(f) => println!("log p ~ {:.3} + {:.3}·({}), R^2 {:.4} on {} points", f.intercept, f.eta, f.shape.name(), f.r_squared, f.points_used),
        None => println!("not enough resolved thresholds for a fit"),
    }
    Ok(())
}
