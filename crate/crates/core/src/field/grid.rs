use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Largest spatial dimension supported by the lattice iterators.
pub const MAX_DIM: usize = 3;

/// Discretization of the whole space by a periodic box of side `2*pi*L`.
///
/// Admissible frequencies are `xi = m / L` with `m` an integer vector in
/// `{-M_i/2, ..., M_i/2 - 1}` along axis `i`. The mode counts may differ
/// per axis: the fields of interest are strongly anisotropic in frequency,
/// and the isotropic constructor covers the usual case.
#[derive(Clone, Debug, PartialEq)]
pub struct GridSpec {
    dim: usize,
    scale: u32,
    modes: Vec<usize>,
    dealias_fraction: f64,
}

impl GridSpec {
    /// Isotropic grid with `modes` modes along every axis.
    pub fn new(dim: usize, scale: u32, modes: usize) -> Result<Self> {
        Self::anisotropic(scale, vec![modes; dim])
    }

    pub fn anisotropic(scale: u32, modes: Vec<usize>) -> Result<Self> {
        let dim = modes.len();
        if dim == 0 || dim > MAX_DIM {
            return Err(Error::InvalidGrid(format!(
                "dimension {dim} not in 1..={MAX_DIM}"
            )));
        }
        if scale == 0 || scale % 12 != 0 {
            return Err(Error::InvalidGrid(format!(
                "L = {scale} must be a positive multiple of 12"
            )));
        }
        for (axis, &m) in modes.iter().enumerate() {
            if m < 8 || m % 2 != 0 {
                return Err(Error::InvalidGrid(format!(
                    "axis {axis}: M = {m} must be even and at least 8"
                )));
            }
        }
        Ok(Self {
            dim,
            scale,
            modes,
            dealias_fraction: 2.0 / 3.0,
        })
    }

    pub fn with_dealias_fraction(mut self, fraction: f64) -> Result<Self> {
        if !(fraction > 0.0 && fraction <= 1.0) {
            return Err(Error::InvalidGrid(format!(
                "dealias fraction {fraction} not in (0, 1]"
            )));
        }
        self.dealias_fraction = fraction;
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// The frequency-density scale `L`.
    pub fn scale(&self) -> u32 {
        self.scale
    }

    pub fn modes(&self) -> &[usize] {
        &self.modes
    }

    pub fn dealias_fraction(&self) -> f64 {
        self.dealias_fraction
    }

    /// Total number of lattice modes (equivalently collocation points).
    pub fn len(&self) -> usize {
        self.modes.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn box_side(&self) -> f64 {
        2.0 * PI * self.scale as f64
    }

    /// Lebesgue measure of the box, `(2*pi*L)^d`.
    pub fn box_volume(&self) -> f64 {
        self.box_side().powi(self.dim as i32)
    }

    /// Lebesgue measure of one collocation cell.
    pub fn cell_volume(&self) -> f64 {
        self.modes
            .iter()
            .map(|&m| self.box_side() / m as f64)
            .product()
    }

    /// Nyquist frequency `M_i / (2L)` along `axis`.
    pub fn nyquist(&self, axis: usize) -> f64 {
        self.modes[axis] as f64 / (2.0 * self.scale as f64)
    }

    /// Largest lattice frequency magnitude (the corner of the mode box).
    pub fn max_frequency(&self) -> f64 {
        self.modes
            .iter()
            .map(|&m| (m as f64 / (2.0 * self.scale as f64)).powi(2))
            .sum::<f64>()
            .sqrt()
    }

    /// Largest retained wavenumber `|m_i|` along `axis` under dealiasing.
    ///
    /// Never exceeds `(M - 1) / 3`, so a pointwise product of two retained
    /// fields aliases only into discarded modes.
    pub fn cutoff(&self, axis: usize) -> usize {
        let m = self.modes[axis];
        let by_fraction = (self.dealias_fraction * m as f64 / 2.0 + 1e-9).floor() as usize;
        by_fraction.min((m - 1) / 3)
    }

    pub fn cutoffs(&self) -> Vec<usize> {
        (0..self.dim).map(|a| self.cutoff(a)).collect()
    }

    /// Signed wavenumber stored at FFT index `idx` along `axis`.
    pub fn wavenumber(&self, axis: usize, idx: usize) -> i64 {
        let m = self.modes[axis];
        if idx < m / 2 {
            idx as i64
        } else {
            idx as i64 - m as i64
        }
    }

    /// Flat storage index of the signed mode `mode`, if it lies on the lattice.
    pub fn index_of(&self, mode: &[i64]) -> Option<usize> {
        if mode.len() != self.dim {
            return None;
        }
        let mut flat = 0usize;
        for (axis, &m) in mode.iter().enumerate() {
            let n = self.modes[axis] as i64;
            if m < -n / 2 || m >= n / 2 {
                return None;
            }
            let idx = if m >= 0 { m } else { m + n } as usize;
            flat = flat * self.modes[axis] + idx;
        }
        Some(flat)
    }

    /// Signed mode of a flat storage index.
    pub fn mode_of(&self, flat: usize) -> [i64; MAX_DIM] {
        let mut out = [0i64; MAX_DIM];
        let mut rest = flat;
        for axis in (0..self.dim).rev() {
            let n = self.modes[axis];
            out[axis] = self.wavenumber(axis, rest % n);
            rest /= n;
        }
        out
    }

    /// Per-axis wavenumber tables in storage order.
    pub fn wavenumber_tables(&self) -> Vec<Vec<i64>> {
        (0..self.dim)
            .map(|a| (0..self.modes[a]).map(|i| self.wavenumber(a, i)).collect())
            .collect()
    }

    /// Visit every lattice mode in storage order with its signed wavenumber
    /// vector and its frequency `xi = m / L`.
    pub fn for_each_mode<F: FnMut(usize, &[i64], &[f64])>(&self, mut visit: F) {
        let tables = self.wavenumber_tables();
        let inv_l = 1.0 / self.scale as f64;
        let mut idx = [0usize; MAX_DIM];
        let mut mode = [0i64; MAX_DIM];
        let mut xi = [0f64; MAX_DIM];
        for flat in 0..self.len() {
            for a in 0..self.dim {
                mode[a] = tables[a][idx[a]];
                xi[a] = mode[a] as f64 * inv_l;
            }
            visit(flat, &mode[..self.dim], &xi[..self.dim]);
            for a in (0..self.dim).rev() {
                idx[a] += 1;
                if idx[a] < self.modes[a] {
                    break;
                }
                idx[a] = 0;
            }
        }
    }

    /// Squared frequency magnitude `|xi|^2` per storage index.
    pub fn frequency_squared(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.len()];
        self.for_each_mode(|flat, _, xi| out[flat] = xi.iter().map(|x| x * x).sum());
        out
    }

    /// True when the mode lies inside the dealiasing cutoff on every axis.
    pub fn within_cutoff(&self, mode: &[i64]) -> bool {
        mode.iter()
            .enumerate()
            .all(|(a, &m)| m.unsigned_abs() as usize <= self.cutoff(a))
    }

    pub fn check_same(&self, other: &GridSpec) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::GridMismatch(format!("{self:?} vs {other:?}")))
        }
    }

    /// Same box and mode counts with the frequency density halved: relabels
    /// every coefficient from frequency `m/L` to `2m/L`.
    pub fn halved_scale(&self) -> Result<Self> {
        let g = Self::anisotropic(self.scale / 2, self.modes.clone())?;
        g.with_dealias_fraction(self.dealias_fraction)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_grids() {
        assert!(GridSpec::new(2, 10, 16).is_err());
        assert!(GridSpec::new(2, 12, 6).is_err());
        assert!(GridSpec::new(2, 12, 9).is_err());
        assert!(GridSpec::new(4, 12, 8).is_err());
        assert!(GridSpec::new(2, 12, 8).is_ok());
    }

    #[test]
    fn index_roundtrip() {
        let g = GridSpec::anisotropic(12, vec![8, 10]).unwrap();
        for flat in 0..g.len() {
            let m = g.mode_of(flat);
            assert_eq!(g.index_of(&m[..2]), Some(flat));
        }
        assert_eq!(g.index_of(&[4, 0]), None);
        assert_eq!(g.index_of(&[-4, -5]), Some(4 * 10 + 5));
    }

    #[test]
    fn cutoff_respects_two_thirds() {
        let g = GridSpec::new(1, 12, 64).unwrap();
        assert_eq!(g.cutoff(0), 21);
        let g = GridSpec::new(1, 12, 8).unwrap();
        assert_eq!(g.cutoff(0), 2);
        let g = GridSpec::new(1, 12, 12).unwrap();
        assert_eq!(g.cutoff(0), 3);
    }

    #[test]
    fn for_each_mode_matches_mode_of() {
        let g = GridSpec::anisotropic(24, vec![8, 12, 10]).unwrap();
        let mut count = 0;
        g.for_each_mode(|flat, m, xi| {
            assert_eq!(&g.mode_of(flat)[..3], m);
            assert!((xi[1] - m[1] as f64 / 24.0).abs() < 1e-15);
            count += 1;
        });
        assert_eq!(count, g.len());
    }
}
