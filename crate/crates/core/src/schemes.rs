//! Time-stepping maps for the Galerkin-projected equation.
//!
//! Classical explicit schemes (exponential Euler and the two linear-implicit
//! variants) and the nonlinearity-truncated exponential Euler scheme evaluate
//! the drift and the noise term at the left endpoint. The splitting schemes
//! compose the exact free flow with a pointwise, frozen-modulus stochastic
//! flow, which keeps the mass non-increasing under multiplicative noise.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::basis::SpectralBasis;
use crate::error::{Error, Result};
use crate::field::{Field, NormKind};
use crate::noise::{NoiseKind, NoiseModel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SchemeId {
    ExpEuler,
    SemiMidpoint,
    SemiEuler,
    LieTrotter,
    ThreePart,
    TruncExpEuler,
}

impl SchemeId {
    pub const ALL: [SchemeId; 6] = [
        SchemeId::ExpEuler,
        SchemeId::SemiMidpoint,
        SchemeId::SemiEuler,
        SchemeId::LieTrotter,
        SchemeId::ThreePart,
        SchemeId::TruncExpEuler,
    ];

    /// The explicit schemes whose moments diverge.
    pub const CLASSICAL: [SchemeId; 3] = [SchemeId::ExpEuler, SchemeId::SemiMidpoint, SchemeId::SemiEuler];

    pub fn name(self) -> &'static str {
        match self {
            SchemeId::ExpEuler => "exp-euler",
            SchemeId::SemiMidpoint => "semi-midpoint",
            SchemeId::SemiEuler => "semi-euler",
            SchemeId::LieTrotter => "lie-trotter",
            SchemeId::ThreePart => "three-part",
            SchemeId::TruncExpEuler => "trunc-exp-euler",
        }
    }

    pub fn is_splitting(self) -> bool {
        matches!(self, SchemeId::LieTrotter | SchemeId::ThreePart)
    }
}

impl fmt::Display for SchemeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SchemeId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SchemeId::ALL
            .into_iter()
            .find(|id| id.name() == s)
            .ok_or_else(|| Error::config(format!("unknown scheme `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SemiVariant {
    Midpoint,
    Euler,
}

pub const DEFAULT_OVERFLOW: f64 = 1e100;

#[derive(Debug, Clone, PartialEq)]
pub struct SchemeConfig {
    pub scheme: SchemeId,
    /// Power of the nonlinearity `|u|^{2σ}u`.
    pub sigma: u32,
    /// `+1` focusing, `-1` defocusing, `0` switches the nonlinearity off.
    pub lambda: f64,
    pub dt: f64,
    /// Galerkin dimension.
    pub m: usize,
    /// Truncation radius (truncated scheme only).
    pub radius: f64,
    /// Sobolev index of the truncation norm.
    pub kappa: f64,
    /// Exponent of the space-time coupling `λ_M^{2+2κ₁σ} δt ~ 1`.
    pub kappa1: f64,
    pub horizon: f64,
    pub overflow: f64,
    /// Coefficient of `δt·α·u` in the classical schemes.
    pub damping_factor: f64,
    pub dealias: bool,
}

impl SchemeConfig {
    pub fn new(scheme: SchemeId, sigma: u32, lambda: f64, dt: f64, m: usize, horizon: f64) -> Self {
        SchemeConfig {
            scheme,
            sigma,
            lambda,
            dt,
            m,
            radius: f64::INFINITY,
            kappa: 0.0,
            kappa1: 1.0,
            horizon,
            overflow: DEFAULT_OVERFLOW,
            damping_factor: 0.5,
            dealias: sigma == 1,
        }
    }

    /// Number of steps `N = T/δt`.
    pub fn steps(&self) -> Result<usize> {
        if !(self.dt > 0.0) || !(self.horizon > 0.0) {
            return Err(Error::config("dt and T must be positive"));
        }
        let ratio = self.horizon / self.dt;
        let n = ratio.round();
        if n < 1.0 || (ratio - n).abs() > 1e-9 * n {
            return Err(Error::config(format!("T / dt = {ratio} is not a positive integer")));
        }
        Ok(n as usize)
    }

    pub fn validate(&self, basis: &SpectralBasis) -> Result<()> {
        if self.sigma < 1 {
            return Err(Error::config("sigma must be a positive integer"));
        }
        if ![-1.0, 0.0, 1.0].contains(&self.lambda) {
            return Err(Error::config("lambda must be +1 or -1 (0 disables the nonlinearity)"));
        }
        if self.kappa1 <= basis.dim() as f64 / 2.0 {
            return Err(Error::config("kappa1 must exceed d/2"));
        }
        if !(self.radius > 0.0) {
            return Err(Error::config("truncation radius R must be positive"));
        }
        if !(self.kappa >= 0.0) {
            return Err(Error::config("kappa must be nonnegative"));
        }
        if ![0.5, 1.0].contains(&self.damping_factor) {
            return Err(Error::config("damping_factor must be 0.5 or 1.0"));
        }
        if !(self.dt >= 0.0) || !self.dt.is_finite() {
            return Err(Error::config("dt must be finite and nonnegative"));
        }
        basis.check_m(self.m)?;
        self.padding()?;
        Ok(())
    }

    /// Grid padding used for pointwise products: exact for the polynomial
    /// nonlinearity when dealiasing is on.
    pub fn padding(&self) -> Result<usize> {
        if !self.dealias {
            return Ok(1);
        }
        let p = (self.sigma as usize + 1).next_power_of_two();
        if p > 8 {
            return Err(Error::config(format!("dealiasing unsupported for sigma = {}", self.sigma)));
        }
        Ok(p)
    }
}

/// `c · λ_M^{-(2 + 2κ₁σ)}`, the largest step compatible with the
/// space-time coupling.
pub fn cfl_max_dt(basis: &SpectralBasis, m: usize, sigma: f64, kappa1: f64, c: f64) -> Result<f64> {
    let lambda_m = basis.lambda_m(m)?;
    Ok(c * lambda_m.powf(-(2.0 + 2.0 * kappa1 * sigma)))
}

/// One-step lower bound `‖u‖·(m(𝒪)^{-σ} δt ‖u‖^{2σ} − δt(½‖α‖_∞ + 1) − 1)` on the
/// next norm of the exponential Euler scheme, valid while `‖g(u)δW‖ ≤ δt‖u‖`.
pub fn blowup_certificate(norm: f64, dt: f64, sigma: f64, alpha_sup: f64, measure: f64) -> f64 {
    norm * (measure.powf(-sigma) * dt * norm.powf(2.0 * sigma) - dt * (0.5 * alpha_sup + 1.0) - 1.0)
}

/// Norm above which the certificate implies `‖u_{n+1}‖ ≥ ‖u_n‖^{2σ+1−ε}`.
pub fn growth_threshold(dt: f64, sigma: f64, alpha_sup: f64, measure: f64, epsilon: f64) -> f64 {
    let c0 = 0.5 * alpha_sup + 1.0;
    let c_prime = (2.0 * dt * c0 + 2.0) / dt * measure.powf(sigma);
    [
        2.0,
        c0,
        (2.0 / dt + c0).powf(1.0 / (2.0 * sigma)),
        c_prime.powf(1.0 / (2.0 * sigma)),
        (2.0 * measure.powf(sigma) / dt).powf(1.0 / epsilon),
    ]
    .into_iter()
    .fold(f64::MIN, f64::max)
}

/// Eigenvalue of `S_δt = (1 + ½iΔδt)/(1 − ½iΔδt)` on a mode with `-Δ = λ`.
pub fn cayley_multiplier(lambda: f64, dt: f64) -> Complex64 {
    let i = Complex64::new(0.0, 1.0);
    (1.0 - 0.5 * i * lambda * dt) / (1.0 + 0.5 * i * lambda * dt)
}

/// Eigenvalue of `(1 − θ iΔδt)^{-1}`: `θ = ½` gives `𝒯_δt`, `θ = 1` gives `T̂_δt`.
pub fn resolvent_multiplier(lambda: f64, dt: f64, theta: f64) -> Complex64 {
    1.0 / Complex64::new(1.0, theta * lambda * dt)
}

/// A scheme bound to its basis, noise model and grid.
pub struct Stepper<'a> {
    cfg: &'a SchemeConfig,
    model: &'a NoiseModel,
    padding: usize,
    alpha: &'a [f64],
}

impl<'a> Stepper<'a> {
    pub fn new(cfg: &'a SchemeConfig, model: &'a NoiseModel) -> Result<Self> {
        cfg.validate(model.basis())?;
        let padding = cfg.padding()?;
        Ok(Stepper {
            cfg,
            model,
            padding,
            alpha: model.alpha(padding)?,
        })
    }

    pub fn config(&self) -> &SchemeConfig {
        self.cfg
    }

    pub fn padding(&self) -> usize {
        self.padding
    }

    /// Advances `u` by one step driven by the increment `dw`.
    pub fn step(&self, u: &Field, dw: &Field) -> Field {
        if u.is_overflow() {
            return u.clone();
        }
        let mut next = match self.cfg.scheme {
            SchemeId::ExpEuler => self.exp_euler(u, dw, true),
            SchemeId::TruncExpEuler => {
                let inside = u.norm(NormKind::Sobolev(self.cfg.kappa)) <= self.cfg.radius;
                self.exp_euler(u, dw, inside)
            }
            SchemeId::SemiMidpoint => self.semi_implicit(u, dw, SemiVariant::Midpoint),
            SchemeId::SemiEuler => self.semi_implicit(u, dw, SemiVariant::Euler),
            SchemeId::LieTrotter => self.lie_trotter(u, dw),
            SchemeId::ThreePart => self.three_part(u, dw),
        };
        if !next.is_finite() || next.l2() > self.cfg.overflow {
            next.mark_overflow();
        }
        next
    }

    fn to_field(&self, values: &[Complex64]) -> Field {
        Field::from_grid(self.model.basis(), values, self.padding).expect("grid sized by padding")
    }

    fn power(&self, modulus_sq: f64) -> f64 {
        match self.cfg.sigma {
            1 => modulus_sq,
            2 => modulus_sq * modulus_sq,
            s => modulus_sq.powi(s as i32),
        }
    }

    /// `f(u)`, `g(u)δW` and `αu` as coefficient fields.
    fn explicit_terms(&self, u: &Field, dw: &Field) -> (Field, Field, Field) {
        let ug = u.to_grid(self.padding);
        let lambda = self.cfg.lambda;
        let f: Vec<Complex64> = ug
            .iter()
            .map(|&v| Complex64::new(0.0, lambda * self.power(v.norm_sqr())) * v)
            .collect();
        let a: Vec<Complex64> = ug.iter().zip(self.alpha).map(|(&v, &al)| v * al).collect();
        let g = match self.model.kind() {
            NoiseKind::Additive => dw.clone(),
            NoiseKind::Multiplicative => {
                let wg = dw.to_grid(self.padding);
                let prod: Vec<Complex64> = ug
                    .iter()
                    .zip(&wg)
                    .map(|(&v, &w)| Complex64::new(0.0, 1.0) * v * w)
                    .collect();
                self.to_field(&prod)
            }
        };
        (self.to_field(&f), g, self.to_field(&a))
    }

    fn exp_euler(&self, u: &Field, dw: &Field, with_drift: bool) -> Field {
        let dt = self.cfg.dt;
        let (f, g, a) = self.explicit_terms(u, dw);
        let mut w = u.clone();
        if with_drift {
            w.axpy(Complex64::new(dt, 0.0), &f);
            w.axpy(Complex64::new(-dt * self.cfg.damping_factor, 0.0), &a);
        }
        w.axpy(Complex64::new(1.0, 0.0), &g);
        w.project_in_place(self.cfg.m);
        w.free_flow(dt)
    }

    fn semi_implicit(&self, u: &Field, dw: &Field, variant: SemiVariant) -> Field {
        let dt = self.cfg.dt;
        let cayley = move |l: f64| cayley_multiplier(l, dt);
        let resolvent_half = move |l: f64| resolvent_multiplier(l, dt, 0.5);
        let resolvent_full = move |l: f64| resolvent_multiplier(l, dt, 1.0);
        let (mut f, mut g, mut a) = self.explicit_terms(u, dw);
        let mut w = u.clone();
        match variant {
            SemiVariant::Midpoint => {
                w.apply_multiplier(cayley);
                a.apply_multiplier(resolvent_half);
            }
            SemiVariant::Euler => {
                w.apply_multiplier(resolvent_full);
                a.apply_multiplier(resolvent_full);
            }
        }
        f.apply_multiplier(cayley);
        g.apply_multiplier(cayley);
        w.axpy(Complex64::new(dt, 0.0), &f);
        w.axpy(Complex64::new(1.0, 0.0), &g);
        w.axpy(Complex64::new(-dt * self.cfg.damping_factor, 0.0), &a);
        w.project_in_place(self.cfg.m);
        w
    }

    fn lie_trotter(&self, u: &Field, dw: &Field) -> Field {
        let dt = self.cfg.dt;
        let lambda = self.cfg.lambda;
        let v = u.free_flow(dt);
        let mut vg = v.to_grid(self.padding);
        match self.model.kind() {
            NoiseKind::Multiplicative => {
                let wg = dw.to_grid(self.padding);
                for (x, w) in vg.iter_mut().zip(&wg) {
                    let theta = lambda * self.power(x.norm_sqr()) * dt + w.re;
                    *x *= Complex64::from_polar(1.0, theta);
                }
            }
            NoiseKind::Additive => {
                for x in vg.iter_mut() {
                    *x *= Complex64::from_polar(1.0, lambda * self.power(x.norm_sqr()) * dt);
                }
            }
        }
        let mut out = self.to_field(&vg);
        if self.model.kind() == NoiseKind::Additive {
            out.axpy(Complex64::new(1.0, 0.0), dw);
        }
        out.project_in_place(self.cfg.m);
        out
    }

    fn three_part(&self, u: &Field, dw: &Field) -> Field {
        let dt = self.cfg.dt;
        let lambda = self.cfg.lambda;
        let multiplicative = self.model.kind() == NoiseKind::Multiplicative;
        let mut x = u.free_flow(dt);
        x.project_in_place(self.cfg.m);
        let mut yg = x.to_grid(self.padding);
        for (y, &al) in yg.iter_mut().zip(self.alpha) {
            let damping = if multiplicative { (-0.5 * al * dt).exp() } else { 1.0 };
            *y *= Complex64::from_polar(damping, lambda * self.power(y.norm_sqr()) * dt);
        }
        let mut y = self.to_field(&yg);
        y.project_in_place(self.cfg.m);
        if multiplicative {
            let mut zg = y.to_grid(self.padding);
            let wg = dw.to_grid(self.padding);
            for (z, w) in zg.iter_mut().zip(&wg) {
                *z *= Complex64::from_polar(1.0, w.re);
            }
            let mut z = self.to_field(&zg);
            z.project_in_place(self.cfg.m);
            z
        } else {
            y.axpy(Complex64::new(1.0, 0.0), dw);
            y.project_in_place(self.cfg.m);
            y
        }
    }
}

pub fn step_exp_euler(u: &Field, dw: &Field, model: &NoiseModel, cfg: &SchemeConfig) -> Result<Field> {
    with_scheme(u, dw, model, cfg, SchemeId::ExpEuler)
}

pub fn step_semi_implicit(
    u: &Field,
    dw: &Field,
    model: &NoiseModel,
    cfg: &SchemeConfig,
    variant: SemiVariant,
) -> Result<Field> {
    let id = match variant {
        SemiVariant::Midpoint => SchemeId::SemiMidpoint,
        SemiVariant::Euler => SchemeId::SemiEuler,
    };
    with_scheme(u, dw, model, cfg, id)
}

pub fn step_lie_trotter(u: &Field, dw: &Field, model: &NoiseModel, cfg: &SchemeConfig) -> Result<Field> {
    with_scheme(u, dw, model, cfg, SchemeId::LieTrotter)
}

pub fn step_three_part(u: &Field, dw: &Field, model: &NoiseModel, cfg: &SchemeConfig) -> Result<Field> {
    with_scheme(u, dw, model, cfg, SchemeId::ThreePart)
}

pub fn step_trunc_exp_euler(u: &Field, dw: &Field, model: &NoiseModel, cfg: &SchemeConfig) -> Result<Field> {
    with_scheme(u, dw, model, cfg, SchemeId::TruncExpEuler)
}

fn with_scheme(u: &Field, dw: &Field, model: &NoiseModel, cfg: &SchemeConfig, id: SchemeId) -> Result<Field> {
    let cfg = SchemeConfig { scheme: id, ..cfg.clone() };
    Ok(Stepper::new(&cfg, model)?.step(u, dw))
}
