//! Complex states in spectral coefficients, the free Schrödinger group,
//! Galerkin projection and norms.

use std::sync::Arc;

use num_complex::Complex64;

use crate::basis::{Direction, SpectralBasis};
use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// A state `u = Σ c_j e_j` tied to a basis.
#[derive(Clone)]
pub struct Field {
    basis: Arc<SpectralBasis>,
    coeffs: Vec<Complex64>,
    overflow: bool,
}

impl std::fmt::Debug for Field {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Field")
            .field("modes", &self.coeffs.len())
            .field("overflow", &self.overflow)
            .finish()
    }
}

impl PartialEq for Field {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.basis, &other.basis) && self.coeffs == other.coeffs && self.overflow == other.overflow
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NormKind {
    L2,
    /// `(Σ (1+λ_j)^s |c_j|²)^{1/2}`
    Sobolev(f64),
    /// Grid quadrature `(Σ w |u(x)|^p)^{1/p}`, `p ≥ 1`.
    Lp(f64),
    Linf,
}

impl Field {
    pub fn zeros(basis: &Arc<SpectralBasis>) -> Self {
        Field {
            basis: Arc::clone(basis),
            coeffs: vec![ZERO; basis.mode_count()],
            overflow: false,
        }
    }

    pub fn from_coeffs(basis: &Arc<SpectralBasis>, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != basis.mode_count() {
            return Err(Error::Shape {
                expected: basis.mode_count(),
                actual: coeffs.len(),
            });
        }
        Ok(Field {
            basis: Arc::clone(basis),
            coeffs,
            overflow: false,
        })
    }

    /// `c · e_idx` for a storage index.
    pub fn single_mode(basis: &Arc<SpectralBasis>, idx: usize, c: Complex64) -> Self {
        let mut f = Field::zeros(basis);
        f.coeffs[idx] = c;
        f
    }

    /// Interpolates a function sampled on the basis grid.
    pub fn from_fn(basis: &Arc<SpectralBasis>, f: impl Fn([f64; 2]) -> Complex64) -> Self {
        let values: Vec<Complex64> = basis.grid(1).expect("unpadded grid").points().into_iter().map(f).collect();
        Field::from_grid(basis, &values, 1).expect("grid sized by construction")
    }

    /// Builds a field from grid values on the grid with the given padding.
    pub fn from_grid(basis: &Arc<SpectralBasis>, values: &[Complex64], padding: usize) -> Result<Self> {
        let coeffs = basis.transform(values, Direction::ToSpectral, padding)?;
        Field::from_coeffs(basis, coeffs)
    }

    /// Grid values on the grid with the given padding.
    pub fn to_grid(&self, padding: usize) -> Vec<Complex64> {
        self.basis
            .transform(&self.coeffs, Direction::ToPhysical, padding)
            .expect("coefficient count matches basis")
    }

    pub fn basis(&self) -> &Arc<SpectralBasis> {
        &self.basis
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Complex64> {
        self.coeffs
    }

    pub fn is_overflow(&self) -> bool {
        self.overflow
    }

    pub fn mark_overflow(&mut self) {
        self.overflow = true;
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }

    pub fn scale(mut self, s: Complex64) -> Self {
        self.coeffs.iter_mut().for_each(|c| *c *= s);
        self
    }

    /// `self + a·other`
    pub fn axpy(&mut self, a: Complex64, other: &Field) {
        for (x, y) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *x += a * y;
        }
    }

    /// Applies a diagonal multiplier `m(λ_j)` to every coefficient.
    pub fn apply_multiplier(&mut self, m: impl Fn(f64) -> Complex64) {
        for (c, &l) in self.coeffs.iter_mut().zip(self.basis.eigenvalues()) {
            *c *= m(l);
        }
    }

    /// The free Schrödinger group `S(t) = exp(iΔt)`: `c_j ↦ e^{-iλ_j t} c_j`.
    pub fn free_flow(&self, t: f64) -> Field {
        let mut out = self.clone();
        out.apply_multiplier(|l| Complex64::from_polar(1.0, -l * t));
        out
    }

    /// Galerkin projection onto the first `m` modes in eigenvalue order.
    pub fn project(&self, m: usize) -> Result<Field> {
        self.basis.check_m(m)?;
        let mut out = self.clone();
        out.project_in_place(m);
        Ok(out)
    }

    pub(crate) fn project_in_place(&mut self, m: usize) {
        for (c, &r) in self.coeffs.iter_mut().zip(self.basis.rank()) {
            if r >= m {
                *c = ZERO;
            }
        }
    }

    /// `⟨u, v⟩ = Σ u_j conj(v_j)`, the discrete `L²` inner product.
    pub fn inner(&self, other: &Field) -> Complex64 {
        self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a * b.conj()).sum()
    }

    pub fn norm(&self, kind: NormKind) -> f64 {
        if self.overflow {
            return f64::INFINITY;
        }
        match kind {
            NormKind::L2 => self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt(),
            NormKind::Sobolev(s) => self
                .coeffs
                .iter()
                .zip(self.basis.eigenvalues())
                .map(|(c, &l)| (1.0 + l).powf(s) * c.norm_sqr())
                .sum::<f64>()
                .sqrt(),
            NormKind::Lp(p) => {
                let w = self.basis.grid(1).expect("unpadded grid").weight();
                self.to_grid(1)
                    .iter()
                    .map(|u| w * u.norm().powf(p))
                    .sum::<f64>()
                    .powf(1.0 / p)
            }
            NormKind::Linf => self.to_grid(1).iter().map(|u| u.norm()).fold(0.0, f64::max),
        }
    }

    pub fn l2(&self) -> f64 {
        self.norm(NormKind::L2)
    }

    /// `Σ λ_j^s |c_j|²` with the convention `0^s = 0` for the zero mode.
    pub(crate) fn homogeneous_sq(&self, s: f64) -> f64 {
        self.coeffs
            .iter()
            .zip(self.basis.eigenvalues())
            .filter(|(_, &l)| l > 0.0)
            .map(|(c, &l)| l.powf(s) * c.norm_sqr())
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use super::*;
    use crate::basis::DomainKind;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn free_flow_phase_on_mode_one() {
        let b = SpectralBasis::new(DomainKind::Sine, 1, 8).unwrap();
        let u = Field::single_mode(&b, 0, c(1.0));
        let v = u.free_flow(PI);
        assert!((v.coeffs()[0] - c(-1.0)).norm() < 1e-15);
        assert_eq!(u.free_flow(0.0), u);
    }

    #[test]
    fn projection_edges() {
        let b = SpectralBasis::new(DomainKind::Sine, 1, 8).unwrap();
        let u = Field::from_coeffs(&b, (0..8).map(|i| c(i as f64 + 1.0)).collect()).unwrap();
        assert_eq!(u.project(8).unwrap(), u);
        let only_next = Field::single_mode(&b, 4, c(2.0));
        assert!(only_next.project(4).unwrap().l2() == 0.0);
        assert!(matches!(u.project(0), Err(Error::Config(_))));
        assert!(matches!(u.project(9), Err(Error::Config(_))));
    }

    #[test]
    fn norms_of_mode_one() {
        let b = SpectralBasis::new(DomainKind::Sine, 1, 16).unwrap();
        let u = Field::single_mode(&b, 0, c(1.0));
        assert!((u.norm(NormKind::L2) - 1.0).abs() < 1e-15);
        assert!((u.norm(NormKind::Sobolev(1.0)) - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn l4_of_sine() {
        let b = SpectralBasis::new(DomainKind::Sine, 1, 16).unwrap();
        let u = Field::from_fn(&b, |x| c(x[0].sin()));
        let expected = (3.0 * PI / 8.0).powf(0.25);
        assert!((u.norm(NormKind::Lp(4.0)) - expected).abs() < 1e-13);
        assert!((u.norm(NormKind::Linf) - (8.0 * PI / 17.0).sin()).abs() < 1e-12);
    }

    #[test]
    fn zero_field_norms() {
        let b = SpectralBasis::new(DomainKind::Torus, 2, 4).unwrap();
        let z = Field::zeros(&b);
        for k in [NormKind::L2, NormKind::Sobolev(2.0), NormKind::Lp(3.0), NormKind::Linf] {
            assert_eq!(z.norm(k), 0.0);
        }
    }

    #[test]
    fn overflow_sentinel() {
        let b = SpectralBasis::new(DomainKind::Sine, 1, 8).unwrap();
        let mut u = Field::single_mode(&b, 0, c(1.0));
        u.mark_overflow();
        assert_eq!(u.norm(NormKind::L2), f64::INFINITY);
    }

    #[test]
    fn shape_checked() {
        let b = SpectralBasis::new(DomainKind::Sine, 1, 8).unwrap();
        assert!(matches!(Field::from_coeffs(&b, vec![c(0.0); 3]), Err(Error::Shape { .. })));
    }
}
