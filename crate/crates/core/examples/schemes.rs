//! Every time stepper on the same initial datum and noise path.

use snls::harness::{simulate_path, RecordOptions};
use snls::{Covariance, DomainKind, Field, IncrementPlan, NoiseKind, NoiseModel, SchemeConfig, SchemeId, SpectralBasis};

fn main() -> snls::Result<()> {
    let b = SpectralBasis::new(DomainKind::Torus, 1, 64)?;
    let model = NoiseModel::new(&b, &Covariance::Decay { r: 2.0, scale: 1.0 }, NoiseKind::Multiplicative, true, 64)?;
    let psi = Field::from_fn(&b, |x| num_complex::Complex64::new(1.0 + 0.5 * x[0].cos(), 0.0));
    let plan = IncrementPlan::new(1, 0, 500, 1e-3);

    println!("{:<16} {:>10} {:>10} {:>10} {:>10}", "scheme", "mass(0)", "mass(T)", "energy(T)", "sup H1");
    for scheme in [
        SchemeId::ExpEuler,
        SchemeId::SemiMidpoint,
        SchemeId::SemiEuler,
        SchemeId::LieTrotter,
        SchemeId::ThreePart,
        SchemeId::TruncExpEuler,
    ] {
        let mut cfg = SchemeConfig::new(scheme, 1, 1.0, 1e-3, 32, 0.5);
        cfg.radius = 5.0;
        cfg.kappa = 1.0;
        let rec = simulate_path(&cfg, &model, &psi, &plan, 0, &RecordOptions { stride: Some(500), ..Default::default() })?;
        let (first, last) = (rec.rows.first().unwrap(), rec.rows.last().unwrap());
        println!(
            "{:<16} {:>10.6} {:>10.6} {:>10.6} {:>10.6}",
            scheme.name(),
            first.mass,
            last.mass,
            last.energy,
            rec.sup.h1
        );
    }
    Ok(())
}
