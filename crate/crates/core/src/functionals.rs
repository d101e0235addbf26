//! Diagnostic functionals evaluated along trajectories.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::{Field, NormKind};

/// How `‖Δw‖²` enters the log-log functional.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LogLogVariant {
    /// `Σ λ_j² |c_j|²` (zero mode contributes nothing)
    #[default]
    Laplacian,
    /// `‖w‖²_{ℍ²} = Σ (1+λ_j)² |c_j|²`, the Neumann/periodic form
    FullH2,
}

/// `‖u‖²`
pub fn mass(u: &Field) -> f64 {
    let n = u.l2();
    n * n
}

/// `H(w) = ½‖∇w‖² + ‖w‖_{L^{2σ+2}}^{2σ+2} / (2σ+2)`
pub fn energy(u: &Field, sigma: u32) -> f64 {
    if u.is_overflow() {
        return f64::INFINITY;
    }
    let p = 2.0 * sigma as f64 + 2.0;
    0.5 * u.homogeneous_sq(1.0) + potential(u, p) / p
}

fn potential(u: &Field, p: f64) -> f64 {
    let w = u.basis().grid(1).expect("unpadded grid").weight();
    u.to_grid(1).iter().map(|v| w * v.norm().powf(p)).sum()
}

/// `V(v) = ‖(−Δ)^{s/2}v‖² − λ⟨(−Δ)^{s−1}v, |v|^{2σ}v⟩` with the real inner product.
pub fn lyapunov_v(v: &Field, s: u32, sigma: u32, lambda: f64) -> Result<f64> {
    if s < 1 {
        return Err(Error::Domain("Lyapunov functional needs s >= 1".into()));
    }
    let kinetic = v.homogeneous_sq(s as f64);
    let mut lifted = v.clone();
    if s > 1 {
        let power = (s - 1) as i32;
        lifted.apply_multiplier(|l| Complex64::new(if l > 0.0 { l.powi(power) } else { 0.0 }, 0.0));
    }
    let w = v.basis().grid(1)?.weight();
    let pairing: f64 = lifted
        .to_grid(1)
        .iter()
        .zip(v.to_grid(1))
        .map(|(a, b)| w * (a.conj() * b * b.norm_sqr().powi(sigma as i32)).re)
        .sum();
    Ok(kinetic - lambda * pairing)
}

/// `Ũ(w) = log(1 + log(1 + ‖Δw‖²))`
pub fn log_log_u(w: &Field, variant: LogLogVariant) -> f64 {
    let sq = match variant {
        LogLogVariant::Laplacian => w.homogeneous_sq(2.0),
        LogLogVariant::FullH2 => w.norm(NormKind::Sobolev(2.0)).powi(2),
    };
    (1.0 + (1.0 + sq).ln()).ln()
}

/// `‖v‖_∞ / (‖v‖_{ℍ¹}(1 + √log(1 + ‖v‖²_{ℍ²})))`
pub fn critical_sobolev_ratio(v: &Field) -> Result<f64> {
    let h1 = v.norm(NormKind::Sobolev(1.0));
    if h1 == 0.0 {
        return Err(Error::Domain("critical Sobolev ratio of the zero field".into()));
    }
    let h2 = v.norm(NormKind::Sobolev(2.0));
    Ok(v.norm(NormKind::Linf) / (h1 * (1.0 + (1.0 + h2 * h2).ln().sqrt())))
}

/// One row of per-step diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagnosticsRow {
    pub n: usize,
    pub t: f64,
    pub mass: f64,
    pub energy: f64,
    pub h1: f64,
    pub h2: f64,
    pub linf: f64,
    pub utilde: f64,
    pub lyapunov: Option<f64>,
    pub overflow: bool,
}

impl DiagnosticsRow {
    /// Evaluates every functional on `u` at step `n`. `v_index` selects the
    /// Sobolev index of the Lyapunov functional, if wanted.
    pub fn evaluate(u: &Field, n: usize, dt: f64, sigma: u32, lambda: f64, v_index: Option<u32>) -> Self {
        let t = n as f64 * dt;
        if u.is_overflow() {
            let inf = f64::INFINITY;
            return DiagnosticsRow {
                n,
                t,
                mass: inf,
                energy: inf,
                h1: inf,
                h2: inf,
                linf: inf,
                utilde: inf,
                lyapunov: v_index.map(|_| inf),
                overflow: true,
            };
        }
        DiagnosticsRow {
            n,
            t,
            mass: mass(u),
            energy: energy(u, sigma),
            h1: u.norm(NormKind::Sobolev(1.0)),
            h2: u.norm(NormKind::Sobolev(2.0)),
            linf: u.norm(NormKind::Linf),
            utilde: log_log_u(u, LogLogVariant::Laplacian),
            lyapunov: v_index.map(|s| lyapunov_v(u, s, sigma, lambda).expect("s >= 1")),
            overflow: false,
        }
    }
}
