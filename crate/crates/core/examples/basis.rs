//! Spectral bases, grid transforms and the norm family.

use num_complex::Complex64;
use snls::{Direction, DomainKind, Field, NormKind, SpectralBasis};

fn main() -> snls::Result<()> {
    for (kind, dim, modes) in [(DomainKind::Sine, 1, 16), (DomainKind::Torus, 1, 16), (DomainKind::Torus, 2, 8)] {
        let b = SpectralBasis::new(kind, dim, modes)?;
        println!(
            "{kind} d={dim}: {} modes, lambda_M for M = 4 is {}, measure {:.4}",
            b.mode_count(),
            b.lambda_m(4)?,
            b.measure()
        );
    }

    let b = SpectralBasis::new(DomainKind::Torus, 1, 32)?;
    let u = Field::from_fn(&b, |x| Complex64::new(x[0].sin(), (2.0 * x[0]).cos()));
    let grid = b.transform(u.coeffs(), Direction::ToPhysical, 2)?;
    let back = b.transform(&grid, Direction::ToSpectral, 2)?;
    let roundtrip = back.iter().zip(u.coeffs()).map(|(a, c)| (a - c).norm()).fold(0.0, f64::max);
    println!("round trip through the doubled grid: {roundtrip:.1e}");

    for (name, kind) in [
        ("L2", NormKind::L2),
        ("H1", NormKind::Sobolev(1.0)),
        ("H2", NormKind::Sobolev(2.0)),
        ("L4", NormKind::Lp(4.0)),
        ("Linf", NormKind::Linf),
    ] {
        println!("{name:>5} {:.6}", u.norm(kind));
    }
    println!("||S(3)u|| - ||u|| = {:.1e}", u.free_flow(3.0).l2() - u.l2());
    println!("||u - P^4 u|| = {:.6}", {
        let mut rest = u.clone();
        rest.axpy(Complex64::new(-1.0, 0.0), &u.project(4)?);
        rest.l2()
    });
    Ok(())
}
