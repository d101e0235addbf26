//! Conserved and controlled quantities: mass, energy, the Lyapunov functional,
//! the log-log functional and the critical Sobolev ratio.

use num_complex::Complex64;
use snls::functionals::{critical_sobolev_ratio, energy, log_log_u, lyapunov_v, mass, LogLogVariant};
use snls::{DomainKind, Field, SpectralBasis};

fn main() -> snls::Result<()> {
    let b = SpectralBasis::new(DomainKind::Torus, 2, 16)?;
    for amp in [0.1, 1.0, 10.0] {
        let v = Field::from_fn(&b, |x| Complex64::new(amp * (x[0].cos() + 0.5 * (x[1] * 2.0).sin()), amp * 0.2));
        println!(
            "amplitude {amp:>5}: mass {:.4e}  H {:.4e}  V_1 {:.4e}  V_2 {:.4e}  U~ {:.4}/{:.4}  ratio {:.4}",
            mass(&v),
            energy(&v, 1),
            lyapunov_v(&v, 1, 1, 1.0)?,
            lyapunov_v(&v, 2, 1, 1.0)?,
            log_log_u(&v, LogLogVariant::Laplacian),
            log_log_u(&v, LogLogVariant::FullH2),
            critical_sobolev_ratio(&v)?
        );
    }
    Ok(())
}
