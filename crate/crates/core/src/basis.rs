//! Laplacian eigenbases, collocation grids and the spectral/physical transforms.
//!
//! Two domains are supported:
//!
//! * `Sine`: the interval `(0, π)` with homogeneous Dirichlet conditions,
//!   orthonormal modes `e_j(x) = √(2/π) sin(jx)`, eigenvalues `j²`, and the
//!   interior grid `x_k = kπ/(J+1)`.
//! * `Torus`: `[0, 2π)^d` with `e_k(x) = e^{ik·x} / (2π)^{d/2}`, eigenvalues
//!   `|k|²`, wave-vectors `k ∈ {-J/2, …, J/2-1}^d`, and the grid `x_n = 2πn/J`.
//!
//! Coefficients are stored per axis in FFT order for the torus and by
//! increasing `j` for the sine basis. The Galerkin ordering used by
//! [`SpectralBasis::rank`] is independent of storage order.

use std::f64::consts::PI;
use std::fmt;
use std::sync::{Arc, OnceLock};

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DomainKind {
    Sine,
    Torus,
}

impl fmt::Display for DomainKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DomainKind::Sine => f.write_str("sine"),
            DomainKind::Torus => f.write_str("torus"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    ToPhysical,
    ToSpectral,
}

const PADDINGS: [usize; 4] = [1, 2, 4, 8];

/// A collocation grid together with its transform plans.
///
/// A grid with padding factor `P` resolves `P` times as many modes per axis as
/// the basis it belongs to; basis coefficients are zero-extended on the way
/// out and truncated on the way back.
pub struct Grid {
    kind: DomainKind,
    dim: usize,
    points_per_axis: usize,
    weight: f64,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid")
            .field("kind", &self.kind)
            .field("dim", &self.dim)
            .field("points_per_axis", &self.points_per_axis)
            .field("weight", &self.weight)
            .finish()
    }
}

impl Grid {
    fn new(kind: DomainKind, dim: usize, points_per_axis: usize) -> Self {
        let mut planner = FftPlanner::new();
        let (fft_len, weight) = match kind {
            DomainKind::Sine => (2 * (points_per_axis + 1), PI / (points_per_axis + 1) as f64),
            DomainKind::Torus => (
                points_per_axis,
                (2.0 * PI).powi(dim as i32) / (points_per_axis.pow(dim as u32)) as f64,
            ),
        };
        Grid {
            kind,
            dim,
            points_per_axis,
            weight,
            forward: planner.plan_fft_forward(fft_len),
            inverse: planner.plan_fft_inverse(fft_len),
        }
    }

    pub fn len(&self) -> usize {
        self.points_per_axis.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn points_per_axis(&self) -> usize {
        self.points_per_axis
    }

    /// Quadrature weight of every grid point.
    pub fn weight(&self) -> f64 {
        self.weight
    }

    /// Coordinates of the grid points in storage order (second entry is zero in 1D).
    pub fn points(&self) -> Vec<[f64; 2]> {
        let n = self.points_per_axis;
        let axis: Vec<f64> = match self.kind {
            DomainKind::Sine => (1..=n).map(|k| k as f64 * PI / (n + 1) as f64).collect(),
            DomainKind::Torus => (0..n).map(|k| 2.0 * PI * k as f64 / n as f64).collect(),
        };
        if self.dim == 1 {
            axis.iter().map(|&x| [x, 0.0]).collect()
        } else {
            let mut out = Vec::with_capacity(n * n);
            for &x in &axis {
                for &y in &axis {
                    out.push([x, y]);
                }
            }
            out
        }
    }

    fn sine_kernel(&self, data: &[Complex64], scale: f64) -> Vec<Complex64> {
        // Odd extension of length 2(n+1); the FFT yields -2i Σ y_j sin(πjk/(n+1)).
        let n = self.points_per_axis;
        let len = 2 * (n + 1);
        let mut buf = vec![Complex64::new(0.0, 0.0); len];
        for (j, &v) in data.iter().enumerate() {
            buf[j + 1] = v;
            buf[len - j - 1] = -v;
        }
        self.forward.process(&mut buf);
        let factor = Complex64::new(0.0, 0.5 * scale);
        buf[1..=n].iter().map(|&y| y * factor).collect()
    }

    fn fft_nd(&self, buf: &mut [Complex64], inverse: bool) {
        let plan = if inverse { &self.inverse } else { &self.forward };
        let n = self.points_per_axis;
        plan.process(buf);
        if self.dim == 2 {
            transpose(buf, n);
            plan.process(buf);
            transpose(buf, n);
        }
    }
}

fn transpose(buf: &mut [Complex64], n: usize) {
    for i in 0..n {
        for j in (i + 1)..n {
            buf.swap(i * n + j, j * n + i);
        }
    }
}

/// Eigenbasis of the Laplacian on the chosen domain.
pub struct SpectralBasis {
    kind: DomainKind,
    dim: usize,
    modes_per_axis: usize,
    eigenvalues: Vec<f64>,
    wave_vectors: Vec<[i64; 2]>,
    order: Vec<usize>,
    rank: Vec<usize>,
    grids: [OnceLock<Grid>; 4],
}

impl fmt::Debug for SpectralBasis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SpectralBasis")
            .field("kind", &self.kind)
            .field("dim", &self.dim)
            .field("modes_per_axis", &self.modes_per_axis)
            .finish()
    }
}

impl SpectralBasis {
    /// Builds the basis with `modes` modes per axis.
    pub fn new(kind: DomainKind, dim: usize, modes: usize) -> Result<Arc<Self>> {
        if !(dim == 1 || dim == 2) {
            return Err(Error::config(format!("dimension {dim} unsupported (expected 1 or 2)")));
        }
        if kind == DomainKind::Sine && dim == 2 {
            return Err(Error::config("the sine basis is only available in one dimension"));
        }
        if modes < 2 || !modes.is_power_of_two() {
            return Err(Error::config(format!("modes per axis must be a power of two >= 2, got {modes}")));
        }
        let axis: Vec<i64> = match kind {
            DomainKind::Sine => (1..=modes as i64).collect(),
            DomainKind::Torus => (0..modes as i64)
                .map(|i| if i < modes as i64 / 2 { i } else { i - modes as i64 })
                .collect(),
        };
        let wave_vectors: Vec<[i64; 2]> = if dim == 1 {
            axis.iter().map(|&k| [k, 0]).collect()
        } else {
            axis.iter()
                .flat_map(|&k0| axis.iter().map(move |&k1| [k0, k1]))
                .collect()
        };
        let eigenvalues: Vec<f64> = wave_vectors
            .iter()
            .map(|k| (k[0] * k[0] + k[1] * k[1]) as f64)
            .collect();
        let mut order: Vec<usize> = (0..wave_vectors.len()).collect();
        order.sort_by(|&a, &b| {
            eigenvalues[a]
                .total_cmp(&eigenvalues[b])
                .then_with(|| wave_vectors[a].cmp(&wave_vectors[b]))
        });
        let mut rank = vec![0; order.len()];
        for (r, &idx) in order.iter().enumerate() {
            rank[idx] = r;
        }
        Ok(Arc::new(SpectralBasis {
            kind,
            dim,
            modes_per_axis: modes,
            eigenvalues,
            wave_vectors,
            order,
            rank,
            grids: Default::default(),
        }))
    }

    pub fn kind(&self) -> DomainKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn modes_per_axis(&self) -> usize {
        self.modes_per_axis
    }

    /// Total number of modes, `J^d`.
    pub fn mode_count(&self) -> usize {
        self.eigenvalues.len()
    }

    /// Eigenvalues of `-Δ` in storage order.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Mode labels in storage order: `[j, 0]` for sine, the wave-vector on the torus.
    pub fn wave_vectors(&self) -> &[[i64; 2]] {
        &self.wave_vectors
    }

    /// Storage indices sorted by increasing eigenvalue, ties by wave-vector.
    pub fn order(&self) -> &[usize] {
        &self.order
    }

    /// Position of each storage index within [`Self::order`].
    pub fn rank(&self) -> &[usize] {
        &self.rank
    }

    /// Storage index of the mode with the given label, if present.
    pub fn index_of(&self, label: [i64; 2]) -> Option<usize> {
        self.wave_vectors.iter().position(|&k| k == label)
    }

    /// Largest eigenvalue kept by a projection onto `m` modes.
    pub fn lambda_m(&self, m: usize) -> Result<f64> {
        self.check_m(m)?;
        Ok(self.eigenvalues[self.order[m - 1]])
    }

    pub(crate) fn check_m(&self, m: usize) -> Result<()> {
        if m == 0 || m > self.mode_count() {
            return Err(Error::config(format!(
                "Galerkin dimension {m} outside 1..={}",
                self.mode_count()
            )));
        }
        Ok(())
    }

    /// Lebesgue measure of the domain.
    pub fn measure(&self) -> f64 {
        match self.kind {
            DomainKind::Sine => PI,
            DomainKind::Torus => (2.0 * PI).powi(self.dim as i32),
        }
    }

    /// Storage index of the conjugate partner: `e_k` with `conj(e_k) = e_partner`.
    /// `None` when the partner is not representable (a `-J/2` component on the torus).
    pub fn conjugate_partner(&self, idx: usize) -> Option<usize> {
        match self.kind {
            DomainKind::Sine => Some(idx),
            DomainKind::Torus => {
                let half = self.modes_per_axis as i64 / 2;
                let k = self.wave_vectors[idx];
                if k[0] == -half || (self.dim == 2 && k[1] == -half) {
                    return None;
                }
                self.index_of([-k[0], -k[1]])
            }
        }
    }

    /// Padding factors accepted by the transforms.
    pub fn paddings() -> &'static [usize] {
        &PADDINGS
    }

    /// Collocation grid with the given padding factor (1, 2, 4 or 8).
    pub fn grid(&self, padding: usize) -> Result<&Grid> {
        let slot = PADDINGS
            .iter()
            .position(|&p| p == padding)
            .ok_or_else(|| Error::config(format!("padding factor {padding} not in {PADDINGS:?}")))?;
        Ok(self.grids[slot].get_or_init(|| {
            let n = match self.kind {
                DomainKind::Sine => padding * (self.modes_per_axis + 1) - 1,
                DomainKind::Torus => padding * self.modes_per_axis,
            };
            Grid::new(self.kind, self.dim, n)
        }))
    }

    /// Value of the orthonormal eigenfunction at storage index `idx`.
    pub fn eigenfunction(&self, idx: usize, x: [f64; 2]) -> Complex64 {
        let k = self.wave_vectors[idx];
        match self.kind {
            DomainKind::Sine => Complex64::new((2.0 / PI).sqrt() * (k[0] as f64 * x[0]).sin(), 0.0),
            DomainKind::Torus => {
                let phase = k[0] as f64 * x[0] + if self.dim == 2 { k[1] as f64 * x[1] } else { 0.0 };
                Complex64::from_polar(1.0, phase) / (2.0 * PI).powf(self.dim as f64 / 2.0)
            }
        }
    }

    /// Maps coefficients to grid values or back. Padded grids zero-extend the
    /// coefficients; the spectral direction truncates to the basis modes.
    pub fn transform(&self, data: &[Complex64], direction: Direction, padding: usize) -> Result<Vec<Complex64>> {
        let grid = self.grid(padding)?;
        let expected = match direction {
            Direction::ToPhysical => self.mode_count(),
            Direction::ToSpectral => grid.len(),
        };
        if data.len() != expected {
            return Err(Error::Shape { expected, actual: data.len() });
        }
        Ok(match (self.kind, direction) {
            (DomainKind::Sine, Direction::ToPhysical) => {
                let mut ext = data.to_vec();
                ext.resize(grid.points_per_axis, Complex64::new(0.0, 0.0));
                grid.sine_kernel(&ext, (2.0 / PI).sqrt())
            }
            (DomainKind::Sine, Direction::ToSpectral) => {
                let mut c = grid.sine_kernel(data, grid.weight * (2.0 / PI).sqrt());
                c.truncate(self.modes_per_axis);
                c
            }
            (DomainKind::Torus, Direction::ToPhysical) => {
                let mut buf = vec![Complex64::new(0.0, 0.0); grid.len()];
                for (i, &c) in data.iter().enumerate() {
                    buf[self.padded_index(i, grid.points_per_axis)] = c;
                }
                grid.fft_nd(&mut buf, true);
                let scale = (2.0 * PI).powf(-(self.dim as f64) / 2.0);
                buf.iter_mut().for_each(|v| *v *= scale);
                buf
            }
            (DomainKind::Torus, Direction::ToSpectral) => {
                let mut buf = data.to_vec();
                grid.fft_nd(&mut buf, false);
                let scale = grid.weight * (2.0 * PI).powf(-(self.dim as f64) / 2.0);
                (0..self.mode_count())
                    .map(|i| buf[self.padded_index(i, grid.points_per_axis)] * scale)
                    .collect()
            }
        })
    }

    fn padded_index(&self, idx: usize, n: usize) -> usize {
        let k = self.wave_vectors[idx];
        let wrap = |v: i64| v.rem_euclid(n as i64) as usize;
        if self.dim == 1 {
            wrap(k[0])
        } else {
            wrap(k[0]) * n + wrap(k[1])
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sine_eigenvalues_are_squares() {
        let b = SpectralBasis::new(DomainKind::Sine, 1, 8).unwrap();
        let expected: Vec<f64> = (1..=8).map(|j| (j * j) as f64).collect();
        assert_eq!(b.eigenvalues(), expected.as_slice());
        assert_eq!(b.grid(1).unwrap().len(), 8);
    }

    #[test]
    fn torus_wave_vectors_and_zero_mode() {
        let b = SpectralBasis::new(DomainKind::Torus, 1, 8).unwrap();
        let mut ks: Vec<i64> = b.wave_vectors().iter().map(|k| k[0]).collect();
        ks.sort();
        assert_eq!(ks, (-4..=3).collect::<Vec<_>>());
        let zero = b.index_of([0, 0]).unwrap();
        assert_eq!(b.eigenvalues()[zero], 0.0);
        for (k, &l) in b.wave_vectors().iter().zip(b.eigenvalues()) {
            assert_eq!(l, (k[0] * k[0]) as f64);
        }
    }

    #[test]
    fn torus_2d_mode_count() {
        let b = SpectralBasis::new(DomainKind::Torus, 2, 4).unwrap();
        assert_eq!(b.mode_count(), 16);
        assert_eq!(b.eigenvalues()[b.index_of([1, 1]).unwrap()], 2.0);
        assert_eq!(b.grid(1).unwrap().len(), 16);
    }

    #[test]
    fn unsupported_combinations() {
        assert!(matches!(SpectralBasis::new(DomainKind::Sine, 2, 8), Err(Error::Config(_))));
        assert!(matches!(SpectralBasis::new(DomainKind::Torus, 3, 8), Err(Error::Config(_))));
        assert!(matches!(SpectralBasis::new(DomainKind::Torus, 1, 6), Err(Error::Config(_))));
        assert!(matches!(SpectralBasis::new(DomainKind::Torus, 1, 1), Err(Error::Config(_))));
    }

    #[test]
    fn galerkin_order_ties_lexicographic() {
        let b = SpectralBasis::new(DomainKind::Torus, 1, 8).unwrap();
        let labels: Vec<i64> = b.order().iter().map(|&i| b.wave_vectors()[i][0]).collect();
        assert_eq!(labels, vec![0, -1, 1, -2, 2, -3, 3, -4]);
        assert_eq!(b.lambda_m(3).unwrap(), 1.0);
        assert_eq!(b.lambda_m(8).unwrap(), 16.0);
        assert!(b.lambda_m(0).is_err());
        assert!(b.lambda_m(9).is_err());
    }

    #[test]
    fn sine_mode_one_samples() {
        let b = SpectralBasis::new(DomainKind::Sine, 1, 16).unwrap();
        let mut c = vec![Complex64::new(0.0, 0.0); 16];
        c[0] = Complex64::new(1.0, 0.0);
        let u = b.transform(&c, Direction::ToPhysical, 1).unwrap();
        for (v, x) in u.iter().zip(b.grid(1).unwrap().points()) {
            let exact = (2.0 / PI).sqrt() * x[0].sin();
            assert!((v.re - exact).abs() < 1e-14 && v.im.abs() < 1e-14);
        }
    }

    #[test]
    fn shape_error() {
        let b = SpectralBasis::new(DomainKind::Sine, 1, 8).unwrap();
        let c = vec![Complex64::new(0.0, 0.0); 7];
        assert!(matches!(
            b.transform(&c, Direction::ToPhysical, 1),
            Err(Error::Shape { expected: 8, actual: 7 })
        ));
    }

    #[test]
    fn transforms_match_direct_synthesis() {
        for (kind, dim, j) in [(DomainKind::Sine, 1, 8), (DomainKind::Torus, 1, 8), (DomainKind::Torus, 2, 4)] {
            let b = SpectralBasis::new(kind, dim, j).unwrap();
            let c: Vec<Complex64> = (0..b.mode_count())
                .map(|i| Complex64::new((i as f64 * 0.37).sin(), (i as f64 * 1.3).cos()))
                .collect();
            for &p in &[1, 2] {
                let grid = b.grid(p).unwrap();
                let u = b.transform(&c, Direction::ToPhysical, p).unwrap();
                for (v, x) in u.iter().zip(grid.points()) {
                    let direct: Complex64 = c
                        .iter()
                        .enumerate()
                        .map(|(i, &ci)| ci * b.eigenfunction(i, x))
                        .sum();
                    assert!((v - direct).norm() < 1e-12, "{kind:?} d={dim} p={p}");
                }
                let back = b.transform(&u, Direction::ToSpectral, p).unwrap();
                for (a, bb) in back.iter().zip(&c) {
                    assert!((a - bb).norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn discrete_orthonormality() {
        for (kind, dim, j) in [(DomainKind::Sine, 1, 8), (DomainKind::Torus, 1, 8), (DomainKind::Torus, 2, 4)] {
            let b = SpectralBasis::new(kind, dim, j).unwrap();
            let grid = b.grid(1).unwrap();
            let pts = grid.points();
            for a in 0..b.mode_count() {
                for c in 0..b.mode_count() {
                    let ip: Complex64 = pts
                        .iter()
                        .map(|&x| b.eigenfunction(a, x) * b.eigenfunction(c, x).conj() * grid.weight())
                        .sum();
                    let delta = if a == c { 1.0 } else { 0.0 };
                    assert!((ip - delta).norm() < 1e-12, "{kind:?} {a} {c}: {ip}");
                }
            }
        }
    }
}
