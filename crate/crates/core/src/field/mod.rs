//! Band-limited periodic fields stored as Fourier coefficients.
//!
//! A field on a [`GridSpec`] represents `f(x) = sum_m c_m e^{i (m/L).x}` on
//! the box `[0, 2*pi*L)^d`. A function on the whole space with Fourier
//! transform `f_hat` corresponds to coefficients `c_m = f_hat(m/L) / (2*pi*L)^d`.

mod container;
pub(crate) mod fft;
mod grid;

use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use rustfft::FftDirection;

pub use container::{read_field, write_field};
pub use grid::{GridSpec, MAX_DIM};

use crate::error::{Error, Result};

/// Relative magnitude below which a coefficient counts as unpopulated when
/// deriving spectral extents from numerically computed fields.
pub const NEGLIGIBLE: f64 = 1e-15;

/// A Lebesgue or summation exponent in `[1, inf]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Exponent(f64);

impl Exponent {
    pub const ONE: Exponent = Exponent(1.0);
    pub const TWO: Exponent = Exponent(2.0);
    pub const INFINITY: Exponent = Exponent(f64::INFINITY);

    pub fn new(value: f64) -> Result<Self> {
        if value >= 1.0 {
            Ok(Self(value))
        } else {
            Err(Error::InvalidExponent(value))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn is_infinite(self) -> bool {
        self.0.is_infinite()
    }

    /// `1/p`, zero for `p = inf`.
    pub fn reciprocal(self) -> f64 {
        if self.is_infinite() {
            0.0
        } else {
            1.0 / self.0
        }
    }
}

impl std::fmt::Display for Exponent {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.is_infinite() {
            write!(f, "inf")
        } else {
            write!(f, "{}", self.0)
        }
    }
}

impl std::str::FromStr for Exponent {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "inf" | "infinity" | "Inf" => Ok(Self::INFINITY),
            other => {
                let v: f64 = other
                    .parse()
                    .map_err(|_| Error::Config(format!("bad exponent '{other}'")))?;
                Self::new(v)
            }
        }
    }
}

/// Point values on the `M_1 x ... x M_d` collocation lattice
/// `x_j = j * 2*pi*L / M`.
#[derive(Clone, Debug)]
pub struct Samples {
    grid: GridSpec,
    values: Vec<Complex64>,
}

impl Samples {
    pub fn new(grid: GridSpec, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::SizeMismatch {
                expected: grid.len(),
                actual: values.len(),
            });
        }
        Ok(Self { grid, values })
    }

    pub fn from_real(grid: GridSpec, values: &[f64]) -> Result<Self> {
        Self::new(grid, values.iter().map(|&v| Complex64::new(v, 0.0)).collect())
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    /// Largest imaginary part over the lattice.
    pub fn max_imag(&self) -> f64 {
        self.values.iter().map(|v| v.im.abs()).fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Forward analysis back to Fourier coefficients. With `real` set the
    /// imaginary parts are discarded first, so the result is Hermitian.
    pub fn to_spectral(&self, real: bool) -> SpectralField {
        let mut data = if real {
            self.values.iter().map(|v| Complex64::new(v.re, 0.0)).collect()
        } else {
            self.values.clone()
        };
        fft::transform(self.grid.modes(), &mut data, FftDirection::Forward);
        let norm = 1.0 / self.grid.len() as f64;
        data.iter_mut().for_each(|c| *c *= norm);
        SpectralField {
            grid: self.grid.clone(),
            coeffs: data,
            real,
        }
    }

    /// Forward analysis with every mode beyond the dealiasing cutoff zeroed.
    pub fn to_spectral_dealiased(&self, real: bool) -> SpectralField {
        let mut f = self.to_spectral(real);
        f.truncate_to_cutoff();
        f
    }

    /// `|f|^p` weighted by the cell volume, summed and rooted; max for `p = inf`.
    pub fn lp_norm(&self, p: Exponent) -> f64 {
        if p.is_infinite() {
            return self.max_abs();
        }
        let pv = p.value();
        let sum: f64 = if pv == 2.0 {
            self.values.iter().map(|v| v.norm_sqr()).sum()
        } else if pv == 1.0 {
            self.values.iter().map(|v| v.norm()).sum()
        } else {
            self.values.iter().map(|v| v.norm().powf(pv)).sum()
        };
        (sum * self.grid.cell_volume()).powf(1.0 / pv)
    }

    pub fn mul_assign(&mut self, other: &Samples) {
        for (a, b) in self.values.iter_mut().zip(&other.values) {
            *a *= *b;
        }
    }
}

/// Fourier coefficients of a periodic field on a [`GridSpec`].
#[derive(Clone, Debug)]
pub struct SpectralField {
    grid: GridSpec,
    coeffs: Vec<Complex64>,
    real: bool,
}

impl SpectralField {
    pub fn new(grid: GridSpec, coeffs: Vec<Complex64>, real: bool) -> Result<Self> {
        if coeffs.len() != grid.len() {
            return Err(Error::SizeMismatch {
                expected: grid.len(),
                actual: coeffs.len(),
            });
        }
        Ok(Self { grid, coeffs, real })
    }

    pub fn zeros(grid: &GridSpec) -> Self {
        Self {
            grid: grid.clone(),
            coeffs: vec![Complex64::default(); grid.len()],
            real: true,
        }
    }

    /// Constant field `c` (mode zero only).
    pub fn constant(grid: &GridSpec, c: f64) -> Self {
        let mut f = Self::zeros(grid);
        f.coeffs[0] = Complex64::new(c, 0.0);
        f
    }

    /// `amplitude * e^{i (m/L).x}`; complex-valued unless `m = 0` with a real amplitude.
    pub fn single_mode(grid: &GridSpec, mode: &[i64], amplitude: Complex64) -> Result<Self> {
        let idx = grid
            .index_of(mode)
            .ok_or_else(|| Error::InvalidGrid(format!("mode {mode:?} is off the lattice")))?;
        let mut f = Self::zeros(grid);
        f.coeffs[idx] = amplitude;
        f.real = mode.iter().all(|&m| m == 0) && amplitude.im == 0.0;
        Ok(f)
    }

    /// Real field `a e^{i m.x/L} + conj(a) e^{-i m.x/L}`.
    pub fn real_mode(grid: &GridSpec, mode: &[i64], amplitude: Complex64) -> Result<Self> {
        let neg: Vec<i64> = mode.iter().map(|m| -m).collect();
        let i = grid
            .index_of(mode)
            .ok_or_else(|| Error::InvalidGrid(format!("mode {mode:?} is off the lattice")))?;
        let j = grid
            .index_of(&neg)
            .ok_or_else(|| Error::InvalidGrid(format!("mode {neg:?} is off the lattice")))?;
        let mut f = Self::zeros(grid);
        f.coeffs[i] += amplitude;
        f.coeffs[j] += amplitude.conj();
        Ok(f)
    }

    /// Coefficients `f_hat(m/L) / (2*pi*L)^d` sampled from a whole-space
    /// Fourier transform. `real` asserts the caller's symbol is Hermitian.
    pub fn from_transform<F: Fn(&[f64]) -> Complex64>(grid: &GridSpec, f_hat: F, real: bool) -> Self {
        let norm = 1.0 / grid.box_volume();
        let mut coeffs = vec![Complex64::default(); grid.len()];
        grid.for_each_mode(|flat, _, xi| coeffs[flat] = f_hat(xi) * norm);
        Self {
            grid: grid.clone(),
            coeffs,
            real,
        }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Complex64> {
        self.coeffs
    }

    pub fn is_real(&self) -> bool {
        self.real
    }

    /// Same coefficients with the real-valued flag cleared, so synthesis
    /// keeps the imaginary residue.
    pub fn as_complex(&self) -> Self {
        Self {
            real: false,
            ..self.clone()
        }
    }

    pub fn coeff(&self, mode: &[i64]) -> Option<Complex64> {
        self.grid.index_of(mode).map(|i| self.coeffs[i])
    }

    /// Coefficient of the zero mode, i.e. the box average.
    pub fn mean(&self) -> Complex64 {
        self.coeffs[0]
    }

    pub fn without_mean(&self) -> Self {
        let mut f = self.clone();
        f.coeffs[0] = Complex64::default();
        f
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// `sum |c_m|^2`.
    pub fn energy(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| *c == Complex64::default())
    }

    /// `max |c_{-m} - conj(c_m)|` over the lattice, skipping unpaired Nyquist modes.
    pub fn hermitian_residual(&self) -> f64 {
        let mut worst = 0.0f64;
        let mut neg = [0i64; MAX_DIM];
        let d = self.grid.dim();
        self.grid.for_each_mode(|flat, m, _| {
            for a in 0..d {
                neg[a] = -m[a];
            }
            if let Some(j) = self.grid.index_of(&neg[..d]) {
                worst = worst.max((self.coeffs[j] - self.coeffs[flat].conj()).norm());
            }
        });
        worst
    }

    /// Per-axis largest `|m_i|` over modes with `|c_m| > threshold`.
    pub fn populated_extent(&self, threshold: f64) -> Vec<usize> {
        let d = self.grid.dim();
        let mut ext = vec![0usize; d];
        self.grid.for_each_mode(|flat, m, _| {
            if self.coeffs[flat].norm() > threshold {
                for a in 0..d {
                    ext[a] = ext[a].max(m[a].unsigned_abs() as usize);
                }
            }
        });
        ext
    }

    /// Smallest and largest nonzero `|xi|` over modes with `|c_m| > threshold`.
    pub fn frequency_range(&self, threshold: f64) -> Option<(f64, f64)> {
        let mut range: Option<(f64, f64)> = None;
        self.grid.for_each_mode(|flat, _, xi| {
            if self.coeffs[flat].norm() > threshold {
                let r = xi.iter().map(|x| x * x).sum::<f64>().sqrt();
                if r > 0.0 {
                    range = Some(match range {
                        None => (r, r),
                        Some((lo, hi)) => (lo.min(r), hi.max(r)),
                    });
                }
            }
        });
        range
    }

    /// Fail with the first populated mode beyond the dealiasing cutoff.
    pub fn check_within_cutoff(&self) -> Result<()> {
        let mut bad: Option<Vec<i64>> = None;
        self.grid.for_each_mode(|flat, m, _| {
            if bad.is_none()
                && self.coeffs[flat] != Complex64::default()
                && !self.grid.within_cutoff(m)
            {
                bad = Some(m.to_vec());
            }
        });
        match bad {
            Some(mode) => Err(Error::BeyondCutoff {
                mode,
                cutoff: self.grid.cutoffs(),
            }),
            None => Ok(()),
        }
    }

    pub fn truncate_to_cutoff(&mut self) {
        let grid = self.grid.clone();
        let coeffs = &mut self.coeffs;
        grid.for_each_mode(|flat, m, _| {
            if !grid.within_cutoff(m) {
                coeffs[flat] = Complex64::default();
            }
        });
    }

    /// Zero every mode with `|m_i| > extent[i]` on some axis.
    pub fn truncate_to_extent(&mut self, extent: &[usize]) {
        let grid = self.grid.clone();
        let coeffs = &mut self.coeffs;
        grid.for_each_mode(|flat, m, _| {
            if m.iter()
                .zip(extent)
                .any(|(&mi, &e)| mi.unsigned_abs() as usize > e)
            {
                coeffs[flat] = Complex64::default();
            }
        });
    }

    /// Synthesis on the collocation lattice.
    pub fn to_physical(&self) -> Samples {
        let mut data = self.coeffs.clone();
        fft::transform(self.grid.modes(), &mut data, FftDirection::Inverse);
        if self.real {
            data.iter_mut().for_each(|v| v.im = 0.0);
        }
        Samples {
            grid: self.grid.clone(),
            values: data,
        }
    }

    /// Multiply every coefficient by `symbol(xi)`.
    ///
    /// The symbol is only required to be finite at populated modes. The result
    /// keeps the real flag when the symbol is Hermitian, `symbol(-xi) =
    /// conj(symbol(xi))`, at every populated mode.
    pub fn fourier_multiplier<F: Fn(&[f64]) -> Complex64>(&self, symbol: F) -> Result<Self> {
        let zero = Complex64::default();
        let mut out = vec![zero; self.coeffs.len()];
        let mut bad: Option<Vec<i64>> = None;
        let mut hermitian = true;
        let mut neg_xi = [0f64; MAX_DIM];
        let d = self.grid.dim();
        self.grid.for_each_mode(|flat, m, xi| {
            let c = self.coeffs[flat];
            if c == zero {
                return;
            }
            let s = symbol(xi);
            if !(s.re.is_finite() && s.im.is_finite()) {
                if bad.is_none() {
                    bad = Some(m.to_vec());
                }
                return;
            }
            if self.real && hermitian {
                for a in 0..d {
                    neg_xi[a] = -xi[a];
                }
                let s_neg = symbol(&neg_xi[..d]);
                if (s_neg - s.conj()).norm() > 1e-14 * (1.0 + s.norm()) {
                    hermitian = false;
                }
            }
            out[flat] = c * s;
        });
        if let Some(mode) = bad {
            return Err(Error::NonFiniteSymbol { mode });
        }
        Ok(Self {
            grid: self.grid.clone(),
            coeffs: out,
            real: self.real && hermitian,
        })
    }

    /// Multiply by a real, even symbol of `xi` (reality-preserving, no checks).
    pub fn real_multiplier<F: Fn(&[f64]) -> f64>(&self, symbol: F) -> Self {
        let mut out = self.coeffs.clone();
        self.grid.for_each_mode(|flat, _, xi| {
            if out[flat] != Complex64::default() {
                out[flat] *= symbol(xi);
            }
        });
        Self {
            grid: self.grid.clone(),
            coeffs: out,
            real: self.real,
        }
    }

    /// Apply a precomputed real symbol table (storage order).
    pub fn apply_table(&self, table: &[f64]) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .zip(table)
            .map(|(c, s)| c * s)
            .collect();
        Self {
            grid: self.grid.clone(),
            coeffs,
            real: self.real,
        }
    }

    /// `d/dx_axis`, symbol `i xi_axis`. The unpaired Nyquist mode is dropped
    /// so that real fields stay real.
    pub fn derivative(&self, axis: usize) -> Self {
        let grid = &self.grid;
        let m_ax = grid.modes()[axis] as i64;
        let inv_l = 1.0 / grid.scale() as f64;
        let mut out = self.coeffs.clone();
        grid.for_each_mode(|flat, m, _| {
            let k = m[axis];
            out[flat] *= if k == -m_ax / 2 {
                Complex64::default()
            } else {
                Complex64::new(0.0, k as f64 * inv_l)
            };
        });
        Self {
            grid: grid.clone(),
            coeffs: out,
            real: self.real,
        }
    }

    /// Laplacian, symbol `-|xi|^2`.
    pub fn laplacian(&self) -> Self {
        self.real_multiplier(|xi| -xi.iter().map(|x| x * x).sum::<f64>())
    }

    /// Dealiased product: exact convolution of the retained modes, with every
    /// mode beyond the cutoff zeroed.
    pub fn pointwise_product(&self, other: &SpectralField) -> Result<Self> {
        self.grid.check_same(&other.grid)?;
        self.check_within_cutoff()?;
        other.check_within_cutoff()?;
        let mut a = self.to_physical();
        let b = other.to_physical();
        a.mul_assign(&b);
        Ok(a.to_spectral_dealiased(self.real && other.real))
    }

    /// `L^p` norm with the box Lebesgue measure; `p = inf` is the lattice max.
    pub fn lp_norm(&self, p: Exponent) -> Result<f64> {
        if !self.real {
            return Err(Error::NotReal);
        }
        Ok(self.to_physical().lp_norm(p))
    }

    /// `L^2` norm through Plancherel, without leaving Fourier space.
    pub fn plancherel_norm(&self) -> f64 {
        (self.energy() * self.grid.box_volume()).sqrt()
    }

    pub fn scaled(&self, a: f64) -> Self {
        Self {
            grid: self.grid.clone(),
            coeffs: self.coeffs.iter().map(|c| c * a).collect(),
            real: self.real,
        }
    }

    /// `self += a * other`.
    pub fn axpy(&mut self, a: f64, other: &SpectralField) -> Result<()> {
        self.grid.check_same(&other.grid)?;
        for (x, y) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *x += y * a;
        }
        self.real &= other.real;
        Ok(())
    }

    /// Same coefficients relabeled onto the grid with `L/2`: the field
    /// `g(x) = f(2x)` on a box of half the side.
    pub fn dilated(&self) -> Result<Self> {
        Ok(Self {
            grid: self.grid.halved_scale()?,
            coeffs: self.coeffs.clone(),
            real: self.real,
        })
    }

    /// Largest coefficient difference, in units of the larger operand.
    pub fn relative_distance(&self, other: &SpectralField) -> f64 {
        let scale = self.max_abs_coeff().max(other.max_abs_coeff());
        if scale == 0.0 {
            return 0.0;
        }
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
            / scale
    }
}

impl Add<&SpectralField> for &SpectralField {
    type Output = SpectralField;

    fn add(self, rhs: &SpectralField) -> SpectralField {
        assert_eq!(self.grid, rhs.grid, "grid mismatch in addition");
        SpectralField {
            grid: self.grid.clone(),
            coeffs: self.coeffs.iter().zip(&rhs.coeffs).map(|(a, b)| a + b).collect(),
            real: self.real && rhs.real,
        }
    }
}

impl Sub<&SpectralField> for &SpectralField {
    type Output = SpectralField;

    fn sub(self, rhs: &SpectralField) -> SpectralField {
        assert_eq!(self.grid, rhs.grid, "grid mismatch in subtraction");
        SpectralField {
            grid: self.grid.clone(),
            coeffs: self.coeffs.iter().zip(&rhs.coeffs).map(|(a, b)| a - b).collect(),
            real: self.real && rhs.real,
        }
    }
}

impl Mul<f64> for &SpectralField {
    type Output = SpectralField;

    fn mul(self, rhs: f64) -> SpectralField {
        self.scaled(rhs)
    }
}

impl Neg for &SpectralField {
    type Output = SpectralField;

    fn neg(self) -> SpectralField {
        self.scaled(-1.0)
    }
}

/// A `d`-component vector field; all components share one grid and real flag.
#[derive(Clone, Debug)]
pub struct VectorField {
    components: Vec<SpectralField>,
}

impl VectorField {
    pub fn new(components: Vec<SpectralField>) -> Result<Self> {
        let first = components
            .first()
            .ok_or_else(|| Error::InvalidParams("vector field needs components".into()))?;
        if components.len() != first.grid.dim() {
            return Err(Error::GridMismatch(format!(
                "{} components on a {}-dimensional grid",
                components.len(),
                first.grid.dim()
            )));
        }
        for c in &components[1..] {
            first.grid.check_same(&c.grid)?;
            if c.real != first.real {
                return Err(Error::InvalidParams(
                    "components disagree on the real-valued flag".into(),
                ));
            }
        }
        Ok(Self { components })
    }

    pub fn zeros(grid: &GridSpec) -> Self {
        Self {
            components: (0..grid.dim()).map(|_| SpectralField::zeros(grid)).collect(),
        }
    }

    /// `grad f`.
    pub fn gradient(f: &SpectralField) -> Self {
        Self {
            components: (0..f.grid.dim()).map(|a| f.derivative(a)).collect(),
        }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.components[0].grid
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    pub fn is_real(&self) -> bool {
        self.components[0].real
    }

    pub fn components(&self) -> &[SpectralField] {
        &self.components
    }

    pub fn component(&self, i: usize) -> &SpectralField {
        &self.components[i]
    }

    pub fn into_components(self) -> Vec<SpectralField> {
        self.components
    }

    pub fn divergence(&self) -> SpectralField {
        let mut out = self.components[0].derivative(0);
        for (a, c) in self.components.iter().enumerate().skip(1) {
            out = &out + &c.derivative(a);
        }
        out
    }

    pub fn map<F: FnMut(&SpectralField) -> SpectralField>(&self, f: F) -> Self {
        Self {
            components: self.components.iter().map(f).collect(),
        }
    }

    pub fn try_map<F: FnMut(&SpectralField) -> Result<SpectralField>>(&self, f: F) -> Result<Self> {
        Ok(Self {
            components: self.components.iter().map(f).collect::<Result<_>>()?,
        })
    }

    /// Componentwise scalar multiplier.
    pub fn fourier_multiplier<F: Fn(&[f64]) -> Complex64>(&self, symbol: F) -> Result<Self> {
        let comps = self
            .components
            .iter()
            .map(|c| c.fourier_multiplier(&symbol))
            .collect::<Result<Vec<_>>>()?;
        // Reality can differ per component only through unpopulated modes.
        let real = comps.iter().all(|c| c.real);
        Ok(Self {
            components: comps
                .into_iter()
                .map(|mut c| {
                    c.real = real;
                    c
                })
                .collect(),
        })
    }

    pub fn real_multiplier<F: Fn(&[f64]) -> f64>(&self, symbol: F) -> Self {
        self.map(|c| c.real_multiplier(&symbol))
    }

    pub fn apply_table(&self, table: &[f64]) -> Self {
        self.map(|c| c.apply_table(table))
    }

    /// Sum of the component `L^p` norms.
    pub fn lp_norm(&self, p: Exponent) -> Result<f64> {
        self.components.iter().map(|c| c.lp_norm(p)).sum()
    }

    /// `L^p` norm of the pointwise Euclidean magnitude `|u(x)|`.
    pub fn magnitude_lp_norm(&self, p: Exponent) -> Result<f64> {
        if !self.is_real() {
            return Err(Error::NotReal);
        }
        let grid = self.grid().clone();
        let mut mag = vec![0.0f64; grid.len()];
        for c in &self.components {
            for (m, v) in mag.iter_mut().zip(c.to_physical().values()) {
                *m += v.re * v.re;
            }
        }
        let values: Vec<f64> = mag.into_iter().map(f64::sqrt).collect();
        Ok(Samples::from_real(grid, &values)?.lp_norm(p))
    }

    pub fn plancherel_norm(&self) -> f64 {
        self.components.iter().map(|c| c.plancherel_norm()).sum()
    }

    pub fn scaled(&self, a: f64) -> Self {
        self.map(|c| c.scaled(a))
    }

    pub fn axpy(&mut self, a: f64, other: &VectorField) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::GridMismatch("vector dimensions differ".into()));
        }
        for (x, y) in self.components.iter_mut().zip(&other.components) {
            x.axpy(a, y)?;
        }
        Ok(())
    }

    pub fn without_mean(&self) -> Self {
        self.map(|c| c.without_mean())
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.components
            .iter()
            .map(|c| c.max_abs_coeff())
            .fold(0.0, f64::max)
    }

    pub fn relative_distance(&self, other: &VectorField) -> f64 {
        let scale = self.max_abs_coeff().max(other.max_abs_coeff());
        if scale == 0.0 {
            return 0.0;
        }
        self.components
            .iter()
            .zip(&other.components)
            .map(|(a, b)| a.relative_distance(b) * a.max_abs_coeff().max(b.max_abs_coeff()))
            .fold(0.0, f64::max)
            / scale
    }

    pub fn dilated(&self) -> Result<Self> {
        self.try_map(|c| c.dilated())
    }
}

impl Add<&VectorField> for &VectorField {
    type Output = VectorField;

    fn add(self, rhs: &VectorField) -> VectorField {
        VectorField {
            components: self
                .components
                .iter()
                .zip(&rhs.components)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }
}

impl Sub<&VectorField> for &VectorField {
    type Output = VectorField;

    fn sub(self, rhs: &VectorField) -> VectorField {
        VectorField {
            components: self
                .components
                .iter()
                .zip(&rhs.components)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }
}

/// Operations shared by scalar and vector fields.
pub trait FieldLike: Clone {
    fn grid(&self) -> &GridSpec;

    /// Multiply by a real symbol table in storage order.
    fn apply_table(&self, table: &[f64]) -> Self;

    /// `L^p` norm; for vector fields the sum of component norms.
    fn lp_norm(&self, p: Exponent) -> Result<f64>;

    /// Magnitude of the zero-mode coefficient (largest over components).
    fn mean_magnitude(&self) -> f64;

    fn max_abs_coeff(&self) -> f64;

    /// Smallest and largest nonzero `|xi|` with a coefficient above `threshold`.
    fn frequency_range(&self, threshold: f64) -> Option<(f64, f64)>;

    fn zeros_like(&self) -> Self;

    fn scaled(&self, a: f64) -> Self;

    fn axpy(&mut self, a: f64, other: &Self) -> Result<()>;

    fn without_mean(&self) -> Self;
}

impl FieldLike for SpectralField {
    fn grid(&self) -> &GridSpec {
        &self.grid
    }

    fn apply_table(&self, table: &[f64]) -> Self {
        SpectralField::apply_table(self, table)
    }

    fn lp_norm(&self, p: Exponent) -> Result<f64> {
        SpectralField::lp_norm(self, p)
    }

    fn mean_magnitude(&self) -> f64 {
        self.coeffs[0].norm()
    }

    fn max_abs_coeff(&self) -> f64 {
        SpectralField::max_abs_coeff(self)
    }

    fn frequency_range(&self, threshold: f64) -> Option<(f64, f64)> {
        SpectralField::frequency_range(self, threshold)
    }

    fn zeros_like(&self) -> Self {
        SpectralField::zeros(&self.grid)
    }

    fn scaled(&self, a: f64) -> Self {
        SpectralField::scaled(self, a)
    }

    fn axpy(&mut self, a: f64, other: &Self) -> Result<()> {
        SpectralField::axpy(self, a, other)
    }

    fn without_mean(&self) -> Self {
        SpectralField::without_mean(self)
    }
}

impl FieldLike for VectorField {
    fn grid(&self) -> &GridSpec {
        VectorField::grid(self)
    }

    fn apply_table(&self, table: &[f64]) -> Self {
        VectorField::apply_table(self, table)
    }

    fn lp_norm(&self, p: Exponent) -> Result<f64> {
        VectorField::lp_norm(self, p)
    }

    fn mean_magnitude(&self) -> f64 {
        self.components
            .iter()
            .map(|c| c.coeffs[0].norm())
            .fold(0.0, f64::max)
    }

    fn max_abs_coeff(&self) -> f64 {
        VectorField::max_abs_coeff(self)
    }

    fn frequency_range(&self, threshold: f64) -> Option<(f64, f64)> {
        self.components
            .iter()
            .filter_map(|c| c.frequency_range(threshold))
            .reduce(|(a, b), (c, d)| (a.min(c), b.max(d)))
    }

    fn zeros_like(&self) -> Self {
        VectorField::zeros(self.grid())
    }

    fn scaled(&self, a: f64) -> Self {
        VectorField::scaled(self, a)
    }

    fn axpy(&mut self, a: f64, other: &Self) -> Result<()> {
        VectorField::axpy(self, a, other)
    }

    fn without_mean(&self) -> Self {
        VectorField::without_mean(self)
    }
}

#[cfg(test)]
mod tests;
