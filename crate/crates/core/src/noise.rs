//! Q-Wiener increments `δW = Σ_j √q_j e_j (β_j(t+δt) − β_j(t))` and the
//! damping field `α = Σ_j q_j |e_j|²`.
//!
//! Gaussian draws are addressed by `(seed, path, fine step, mode)`: the seed
//! keys a ChaCha8 generator, the path selects its stream and the
//! `(step, mode)` pair fixes the word position. Any increment can therefore be
//! regenerated in isolation, and coarse increments are sums of the very same
//! fine draws.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::sync::{Arc, OnceLock};

use num_complex::Complex64;
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::basis::{DomainKind, SpectralBasis};
use crate::error::{Error, Result};
use crate::field::Field;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NoiseKind {
    /// `g(u) = 1`, `α = 0`
    Additive,
    /// `g(u) = iu`, `α = Σ q_j |e_j|²`
    Multiplicative,
}

/// Covariance eigenvalues of `Q`.
#[derive(Debug, Clone, PartialEq)]
pub enum Covariance {
    /// `q_j = scale · (1 + λ_j)^{-r}`
    Decay { r: f64, scale: f64 },
    /// One value per mode, storage order.
    Explicit(Vec<f64>),
}

/// Partial sums of `Σ q_j (1+λ_j)^s` in Galerkin order.
#[derive(Debug, Clone)]
pub struct TraceReport {
    pub s: f64,
    pub partial_sums: Vec<f64>,
    /// Relative growth of the partial sums over the last decade of modes.
    pub last_decade_growth: f64,
    pub converged: bool,
}

const TRACE_TOLERANCE: f64 = 0.1;

pub struct NoiseModel {
    basis: Arc<SpectralBasis>,
    kind: NoiseKind,
    real: bool,
    cutoff: usize,
    q: Vec<f64>,
    /// Storage indices whose draws are consumed, ascending.
    sources: Vec<usize>,
    alpha: [OnceLock<Vec<f64>>; 4],
}

impl std::fmt::Debug for NoiseModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("NoiseModel")
            .field("kind", &self.kind)
            .field("real", &self.real)
            .field("cutoff", &self.cutoff)
            .finish()
    }
}

impl NoiseModel {
    /// Builds the model. Only modes among the first `cutoff` in Galerkin order
    /// carry noise; a real-valued torus model additionally needs each active
    /// mode's conjugate partner to be active.
    pub fn new(
        basis: &Arc<SpectralBasis>,
        covariance: &Covariance,
        kind: NoiseKind,
        real: bool,
        cutoff: usize,
    ) -> Result<Self> {
        basis.check_m(cutoff).map_err(|_| {
            Error::config(format!("noise cutoff {cutoff} outside 1..={}", basis.mode_count()))
        })?;
        if kind == NoiseKind::Multiplicative && !real {
            return Err(Error::config("multiplicative noise requires a real-valued Wiener process"));
        }
        let raw: Vec<f64> = match covariance {
            Covariance::Decay { r, scale } => {
                if *scale < 0.0 || !scale.is_finite() || !r.is_finite() {
                    return Err(Error::config("noise scale must be finite and nonnegative"));
                }
                basis.eigenvalues().iter().map(|&l| scale * (1.0 + l).powf(-r)).collect()
            }
            Covariance::Explicit(q) => {
                if q.len() != basis.mode_count() {
                    return Err(Error::Shape {
                        expected: basis.mode_count(),
                        actual: q.len(),
                    });
                }
                q.clone()
            }
        };
        if let Some(bad) = raw.iter().position(|&v| !(v >= 0.0) || !v.is_finite()) {
            return Err(Error::config(format!("covariance eigenvalue q[{bad}] = {} is negative", raw[bad])));
        }
        let rank = basis.rank();
        let mut q = vec![0.0; raw.len()];
        for i in 0..raw.len() {
            if rank[i] >= cutoff {
                continue;
            }
            if real && basis.kind() == DomainKind::Torus {
                match basis.conjugate_partner(i) {
                    Some(p) if rank[p] < cutoff => {
                        if raw[p] != raw[i] {
                            return Err(Error::config(format!(
                                "real noise needs q symmetric under k -> -k (mode {i})"
                            )));
                        }
                    }
                    _ => continue,
                }
            }
            q[i] = raw[i];
        }
        let sources = (0..q.len())
            .filter(|&i| q[i] > 0.0)
            .filter(|&i| {
                !(real && basis.kind() == DomainKind::Torus) || i <= basis.conjugate_partner(i).unwrap_or(i)
            })
            .collect();
        let model = NoiseModel {
            basis: Arc::clone(basis),
            kind,
            real,
            cutoff,
            q,
            sources,
            alpha: Default::default(),
        };
        Ok(model)
    }

    pub fn basis(&self) -> &Arc<SpectralBasis> {
        &self.basis
    }

    pub fn kind(&self) -> NoiseKind {
        self.kind
    }

    pub fn is_real(&self) -> bool {
        self.real
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    /// Effective covariance eigenvalues (zero outside the active set).
    pub fn q(&self) -> &[f64] {
        &self.q
    }

    /// `(Σ q_j (1+λ_j)^s)^{1/2}`, the `ℍ^s` Hilbert–Schmidt norm of `Q^{1/2}`.
    pub fn hs_norm(&self, s: f64) -> f64 {
        self.q
            .iter()
            .zip(self.basis.eigenvalues())
            .map(|(&q, &l)| q * (1.0 + l).powf(s))
            .sum::<f64>()
            .sqrt()
    }

    pub fn trace_check(&self, s: f64) -> TraceReport {
        let mut acc = 0.0;
        let partial_sums: Vec<f64> = self
            .basis
            .order()
            .iter()
            .map(|&i| {
                acc += self.q[i] * (1.0 + self.basis.eigenvalues()[i]).powf(s);
                acc
            })
            .collect();
        let n = partial_sums.len();
        let total = partial_sums[n - 1];
        let earlier = partial_sums[(n / 10).max(1) - 1];
        let growth = if total == 0.0 { 0.0 } else { (total - earlier) / total };
        let converged = growth <= TRACE_TOLERANCE;
        if !converged {
            log::warn!(
                "trace condition at s = {s}: partial sums still grow by {:.1}% over the last decade of modes",
                100.0 * growth
            );
        }
        TraceReport {
            s,
            partial_sums,
            last_decade_growth: growth,
            converged,
        }
    }

    /// Damping field on the grid with the given padding.
    pub fn alpha(&self, padding: usize) -> Result<&[f64]> {
        let slot = SpectralBasis::paddings()
            .iter()
            .position(|&p| p == padding)
            .ok_or_else(|| Error::config(format!("padding factor {padding} unsupported")))?;
        let grid = self.basis.grid(padding)?;
        Ok(self.alpha[slot].get_or_init(|| {
            if self.kind == NoiseKind::Additive {
                return vec![0.0; grid.len()];
            }
            grid.points()
                .iter()
                .map(|&x| {
                    self.q
                        .iter()
                        .enumerate()
                        .filter(|(_, &q)| q > 0.0)
                        .map(|(i, &q)| q * self.basis.eigenfunction(i, x).norm_sqr())
                        .sum()
                })
                .collect()
        }))
    }

    /// `max_x α(x)` over the grid with the given padding.
    pub fn alpha_sup(&self, padding: usize) -> Result<f64> {
        Ok(self.alpha(padding)?.iter().copied().fold(0.0, f64::max))
    }

    /// Converts summed standard draws into increment coefficients `√(q_j δt) ξ_j`.
    pub(crate) fn scale_increment(&self, xi: &[Complex64], dt: f64, out: &mut [Complex64]) {
        for ((o, x), &q) in out.iter_mut().zip(xi).zip(&self.q) {
            *o = *x * (q * dt).sqrt();
        }
    }

    /// Adds one fine step of standard draws to `acc` (storage order).
    fn accumulate_standard(&self, pair: (f64, f64), idx: usize, acc: &mut [Complex64]) {
        let (z0, z1) = pair;
        match (self.real, self.basis.kind()) {
            (true, DomainKind::Sine) => acc[idx] += Complex64::new(z0, 0.0),
            (true, DomainKind::Torus) => {
                let partner = self.basis.conjugate_partner(idx).expect("active modes have partners");
                if partner == idx {
                    acc[idx] += Complex64::new(z0, 0.0);
                } else {
                    let xi = Complex64::new(z0, -z1) * FRAC_1_SQRT_2;
                    acc[idx] += xi;
                    acc[partner] += xi.conj();
                }
            }
            (false, _) => acc[idx] += Complex64::new(z0, z1) * FRAC_1_SQRT_2,
        }
    }
}

/// Addressing of the Gaussian draws for one path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IncrementPlan {
    pub seed: u64,
    pub path: u64,
    pub fine_steps: usize,
    pub fine_dt: f64,
}

impl IncrementPlan {
    pub fn new(seed: u64, path: u64, fine_steps: usize, fine_dt: f64) -> Self {
        IncrementPlan {
            seed,
            path,
            fine_steps,
            fine_dt,
        }
    }

    pub fn horizon(&self) -> f64 {
        self.fine_steps as f64 * self.fine_dt
    }

    /// Sequential generator over the fine steps of this plan.
    pub fn stream<'a>(&self, model: &'a NoiseModel) -> IncrementStream<'a> {
        IncrementStream {
            model,
            source: NormalSource::new(self.seed, self.path, model.basis.mode_count()),
            next_step: 0,
            fine_steps: self.fine_steps,
            buffer: vec![Complex64::new(0.0, 0.0); model.basis.mode_count()],
        }
    }
}

/// Box–Muller pairs read from a counter-addressed ChaCha8 stream.
struct NormalSource {
    rng: ChaCha8Rng,
    modes: u128,
    position: u128,
}

impl NormalSource {
    const WORDS_PER_MODE: u128 = 4;

    fn new(seed: u64, path: u64, modes: usize) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(path);
        NormalSource {
            rng,
            modes: modes as u128,
            position: 0,
        }
    }

    fn pair(&mut self, step: usize, mode: usize) -> (f64, f64) {
        let target = (step as u128 * self.modes + mode as u128) * Self::WORDS_PER_MODE;
        if target != self.position {
            self.rng.set_word_pos(target);
        }
        let a = self.rng.next_u64();
        let b = self.rng.next_u64();
        self.position = target + Self::WORDS_PER_MODE;
        let u1 = ((a >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64);
        let u2 = (b >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
        let r = (-2.0 * u1.ln()).sqrt();
        let (s, c) = (2.0 * PI * u2).sin_cos();
        (r * c, r * s)
    }
}

/// Walks the fine steps of a plan in order, yielding standard increments.
pub struct IncrementStream<'a> {
    model: &'a NoiseModel,
    source: NormalSource,
    next_step: usize,
    fine_steps: usize,
    buffer: Vec<Complex64>,
}

impl IncrementStream<'_> {
    /// Standard draws `ξ` of the next fine step (`E|ξ_j|² = 1` on active modes).
    pub fn next_standard(&mut self) -> Option<&[Complex64]> {
        if self.next_step >= self.fine_steps {
            return None;
        }
        self.buffer.iter_mut().for_each(|v| *v = Complex64::new(0.0, 0.0));
        for &idx in &self.model.sources {
            let pair = self.source.pair(self.next_step, idx);
            self.model.accumulate_standard(pair, idx, &mut self.buffer);
        }
        self.next_step += 1;
        Some(&self.buffer)
    }
}

/// Sum of the standard draws of fine steps `first..first + count`.
fn summed_standard(model: &NoiseModel, plan: &IncrementPlan, first: usize, count: usize) -> Vec<Complex64> {
    let mut source = NormalSource::new(plan.seed, plan.path, model.basis.mode_count());
    let mut acc = vec![Complex64::new(0.0, 0.0); model.basis.mode_count()];
    for step in first..first + count {
        for &idx in &model.sources {
            let pair = source.pair(step, idx);
            model.accumulate_standard(pair, idx, &mut acc);
        }
    }
    acc
}

/// Increment over coarse step `coarse_step`, one coarse step being
/// `refinement` fine steps of the plan.
pub fn aggregate_increments(
    model: &NoiseModel,
    plan: &IncrementPlan,
    coarse_step: usize,
    refinement: usize,
) -> Result<Field> {
    if refinement == 0 || !refinement.is_power_of_two() {
        return Err(Error::config(format!("refinement {refinement} is not a power of two")));
    }
    let first = coarse_step
        .checked_mul(refinement)
        .filter(|&f| f + refinement <= plan.fine_steps)
        .ok_or_else(|| {
            Error::Range(format!(
                "coarse step {coarse_step} x {refinement} beyond horizon of {} fine steps",
                plan.fine_steps
            ))
        })?;
    let xi = summed_standard(model, plan, first, refinement);
    let mut coeffs = vec![Complex64::new(0.0, 0.0); xi.len()];
    model.scale_increment(&xi, plan.fine_dt, &mut coeffs);
    Field::from_coeffs(&model.basis, coeffs)
}

/// Increment at `level`: one step of size `2^level · fine_dt`.
pub fn sample_increment(model: &NoiseModel, plan: &IncrementPlan, step: usize, level: u32) -> Result<Field> {
    aggregate_increments(model, plan, step, 1usize << level)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::DomainKind;

    fn explicit(b: &Arc<SpectralBasis>, f: impl Fn(usize) -> f64) -> Covariance {
        Covariance::Explicit((0..b.mode_count()).map(f).collect())
    }

    #[test]
    fn alpha_torus_constant_mode() {
        let b = SpectralBasis::new(DomainKind::Torus, 1, 8).unwrap();
        let zero = b.index_of([0, 0]).unwrap();
        let m = NoiseModel::new(&b, &explicit(&b, |i| if i == zero { 1.0 } else { 0.0 }), NoiseKind::Multiplicative, true, 8)
            .unwrap();
        for &a in m.alpha(1).unwrap() {
            assert!((a - 1.0 / (2.0 * PI)).abs() < 1e-15);
        }
    }

    #[test]
    fn alpha_sine_mode_one() {
        let b = SpectralBasis::new(DomainKind::Sine, 1, 8).unwrap();
        let m = NoiseModel::new(&b, &explicit(&b, |i| if i == 0 { 1.0 } else { 0.0 }), NoiseKind::Multiplicative, true, 8)
            .unwrap();
        let grid = b.grid(2).unwrap();
        for (a, x) in m.alpha(2).unwrap().iter().zip(grid.points()) {
            assert!((a - 2.0 / PI * x[0].sin().powi(2)).abs() < 1e-14);
        }
    }

    #[test]
    fn additive_has_no_damping() {
        let b = SpectralBasis::new(DomainKind::Torus, 1, 8).unwrap();
        let m = NoiseModel::new(&b, &Covariance::Decay { r: 1.0, scale: 1.0 }, NoiseKind::Additive, false, 8).unwrap();
        assert!(m.alpha(1).unwrap().iter().all(|&a| a == 0.0));
    }

    #[test]
    fn rejects_negative_covariance() {
        let b = SpectralBasis::new(DomainKind::Sine, 1, 8).unwrap();
        let r = NoiseModel::new(&b, &explicit(&b, |i| if i == 3 { -1.0 } else { 1.0 }), NoiseKind::Additive, true, 8);
        assert!(matches!(r, Err(Error::Config(_))));
    }

    #[test]
    fn rejects_complex_multiplicative() {
        let b = SpectralBasis::new(DomainKind::Sine, 1, 8).unwrap();
        let r = NoiseModel::new(&b, &Covariance::Decay { r: 1.0, scale: 1.0 }, NoiseKind::Multiplicative, false, 8);
        assert!(r.is_err());
    }

    #[test]
    fn real_torus_excludes_unpaired_modes() {
        let b = SpectralBasis::new(DomainKind::Torus, 1, 8).unwrap();
        let m = NoiseModel::new(&b, &Covariance::Decay { r: 0.0, scale: 1.0 }, NoiseKind::Multiplicative, true, 8).unwrap();
        let nyquist = b.index_of([-4, 0]).unwrap();
        assert_eq!(m.q()[nyquist], 0.0);
        // cutoff 2 keeps {0, -1}; -1 has no active partner
        let m = NoiseModel::new(&b, &Covariance::Decay { r: 0.0, scale: 1.0 }, NoiseKind::Multiplicative, true, 2).unwrap();
        assert_eq!(m.q().iter().filter(|&&q| q > 0.0).count(), 1);
    }

    #[test]
    fn zero_covariance_mode_has_zero_increment() {
        let b = SpectralBasis::new(DomainKind::Sine, 1, 8).unwrap();
        let m = NoiseModel::new(&b, &explicit(&b, |i| if i == 2 { 0.0 } else { 1.0 }), NoiseKind::Additive, true, 8).unwrap();
        let plan = IncrementPlan::new(7, 0, 16, 0.01);
        for step in 0..16 {
            assert_eq!(sample_increment(&m, &plan, step, 0).unwrap().coeffs()[2], Complex64::new(0.0, 0.0));
        }
    }

    #[test]
    fn replay_is_bit_identical_and_order_free() {
        let b = SpectralBasis::new(DomainKind::Torus, 1, 16).unwrap();
        let m = NoiseModel::new(&b, &Covariance::Decay { r: 1.0, scale: 1.0 }, NoiseKind::Multiplicative, true, 16).unwrap();
        let plan = IncrementPlan::new(99, 3, 8, 0.1);
        let forward: Vec<Field> = (0..8).map(|s| sample_increment(&m, &plan, s, 0).unwrap()).collect();
        let backward: Vec<Field> = (0..8).rev().map(|s| sample_increment(&m, &plan, s, 0).unwrap()).collect();
        for (a, b) in forward.iter().zip(backward.iter().rev()) {
            assert_eq!(a.coeffs(), b.coeffs());
        }
        let mut stream = plan.stream(&m);
        for f in &forward {
            let xi = stream.next_standard().unwrap().to_vec();
            let mut scaled = vec![Complex64::new(0.0, 0.0); xi.len()];
            m.scale_increment(&xi, plan.fine_dt, &mut scaled);
            assert_eq!(scaled.as_slice(), f.coeffs());
        }
        assert!(stream.next_standard().is_none());
    }

    #[test]
    fn out_of_horizon() {
        let b = SpectralBasis::new(DomainKind::Sine, 1, 8).unwrap();
        let m = NoiseModel::new(&b, &Covariance::Decay { r: 1.0, scale: 1.0 }, NoiseKind::Additive, true, 8).unwrap();
        let plan = IncrementPlan::new(1, 0, 8, 0.1);
        assert!(matches!(sample_increment(&m, &plan, 8, 0), Err(Error::Range(_))));
        assert!(matches!(sample_increment(&m, &plan, 2, 2), Err(Error::Range(_))));
        assert!(sample_increment(&m, &plan, 1, 2).is_ok());
        assert!(aggregate_increments(&m, &plan, 0, 3).is_err());
    }

    #[test]
    fn real_torus_noise_is_real_on_padded_grid() {
        let b = SpectralBasis::new(DomainKind::Torus, 2, 8).unwrap();
        let m = NoiseModel::new(&b, &Covariance::Decay { r: 1.0, scale: 1.0 }, NoiseKind::Multiplicative, true, 64).unwrap();
        let plan = IncrementPlan::new(5, 1, 4, 0.1);
        let dw = sample_increment(&m, &plan, 2, 0).unwrap();
        for p in [1, 2] {
            assert!(dw.to_grid(p).iter().all(|v| v.im.abs() < 1e-14));
        }
    }

    #[test]
    fn trace_report_flags_slow_decay() {
        let b = SpectralBasis::new(DomainKind::Sine, 1, 64).unwrap();
        let fast = NoiseModel::new(&b, &Covariance::Decay { r: 3.0, scale: 1.0 }, NoiseKind::Additive, true, 64).unwrap();
        assert!(fast.trace_check(1.0).converged);
        let slow = NoiseModel::new(&b, &Covariance::Decay { r: 0.6, scale: 1.0 }, NoiseKind::Additive, true, 64).unwrap();
        assert!(!slow.trace_check(1.0).converged);
    }
}
