//! Exact Fourier-side propagators and Duhamel quadrature.
//!
//! Heat flow `e^{t nu Lap}`, the Lame flow `e^{t L}` with
//! `L u = mu Lap u + (mu + lambda) grad div u`, and the Leray projector are
//! all applied mode by mode. Duhamel integrals
//! `int_0^t e^{(t - s) A} F(s) ds` are evaluated by quadrature over sampled
//! forcings with the propagator applied exactly at each node.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::{FieldLike, GridSpec, SpectralField, VectorField};

/// Viscosities and heat conduction.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhysParams {
    /// Shear viscosity `mu`.
    pub viscosity: f64,
    /// Second Lame constant `lambda`.
    pub second_viscosity: f64,
    /// Heat conduction `kappa`.
    pub conductivity: f64,
}

impl Default for PhysParams {
    fn default() -> Self {
        Self {
            viscosity: 1.0,
            second_viscosity: 0.0,
            conductivity: 1.0,
        }
    }
}

impl PhysParams {
    pub fn new(viscosity: f64, second_viscosity: f64, conductivity: f64) -> Result<Self> {
        let p = Self {
            viscosity,
            second_viscosity,
            conductivity,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.viscosity > 0.0) {
            return Err(Error::InvalidParams(format!("mu = {} must be positive", self.viscosity)));
        }
        if !(self.longitudinal() > 0.0) {
            return Err(Error::InvalidParams(format!(
                "2 mu + lambda = {} must be positive",
                self.longitudinal()
            )));
        }
        if !(self.conductivity > 0.0) {
            return Err(Error::InvalidParams(format!(
                "kappa = {} must be positive",
                self.conductivity
            )));
        }
        Ok(())
    }

    /// `2 mu + lambda`, the decay rate of compressive modes.
    pub fn longitudinal(&self) -> f64 {
        2.0 * self.viscosity + self.second_viscosity
    }
}

fn check_time(t: f64) -> Result<()> {
    if t < 0.0 || !t.is_finite() {
        return Err(Error::NegativeTime(t));
    }
    Ok(())
}

/// `e^{-nu |xi|^2 t}` per storage index.
pub fn heat_table(grid: &GridSpec, t: f64, nu: f64) -> Vec<f64> {
    grid.frequency_squared()
        .into_iter()
        .map(|r2| (-nu * r2 * t).exp())
        .collect()
}

pub fn heat_flow<F: FieldLike>(f: &F, t: f64, nu: f64) -> Result<F> {
    check_time(t)?;
    if !(nu > 0.0) {
        return Err(Error::InvalidParams(format!("diffusivity {nu} must be positive")));
    }
    Ok(f.apply_table(&heat_table(f.grid(), t, nu)))
}

/// Per-mode split of a vector field into the parts parallel and
/// perpendicular to `xi`, each scaled by its own factor. Mode 0 is scaled
/// by `perp` on every component.
fn split_scale<P, Q>(u: &VectorField, parallel: P, perp: Q) -> Result<VectorField>
where
    P: Fn(usize, f64) -> f64,
    Q: Fn(usize, f64) -> f64,
{
    let grid = u.grid().clone();
    let d = grid.dim();
    let mut out: Vec<Vec<Complex64>> = vec![vec![Complex64::default(); grid.len()]; d];
    let comps = u.components();
    grid.for_each_mode(|flat, _, xi| {
        let r2: f64 = xi.iter().map(|x| x * x).sum();
        let b = perp(flat, r2);
        if r2 == 0.0 {
            for a in 0..d {
                out[a][flat] = comps[a].coeffs()[flat] * b;
            }
            return;
        }
        let a_par = parallel(flat, r2);
        let dot: Complex64 = (0..d).map(|a| comps[a].coeffs()[flat] * xi[a]).sum();
        let proj = dot / r2;
        for a in 0..d {
            let c = comps[a].coeffs()[flat];
            let par = proj * xi[a];
            out[a][flat] = par * a_par + (c - par) * b;
        }
    });
    let real = u.is_real();
    VectorField::new(
        out.into_iter()
            .map(|c| SpectralField::new(grid.clone(), c, real))
            .collect::<Result<_>>()?,
    )
}

/// `e^{t L}`: parallel parts decay at `(2 mu + lambda)|xi|^2`, perpendicular
/// parts at `mu |xi|^2`.
pub fn lame_flow(u: &VectorField, t: f64, params: &PhysParams) -> Result<VectorField> {
    check_time(t)?;
    params.validate()?;
    let mu = params.viscosity;
    let long = params.longitudinal();
    split_scale(u, |_, r2| (-long * r2 * t).exp(), |_, r2| (-mu * r2 * t).exp())
}

/// `u_hat - xi (xi . u_hat) / |xi|^2`; mode 0 is left unchanged.
pub fn leray_project(u: &VectorField) -> VectorField {
    split_scale(u, |_, _| 0.0, |_, _| 1.0).expect("projection preserves the grid")
}

/// Linear propagator of a Duhamel integral.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Propagator {
    /// Plain time integral.
    Identity,
    Heat { diffusivity: f64 },
    Lame(PhysParams),
}

/// Fields a [`Propagator`] can act on.
pub trait Propagate: FieldLike {
    fn propagate(&self, propagator: &Propagator, t: f64) -> Result<Self>;
}

impl Propagate for SpectralField {
    fn propagate(&self, propagator: &Propagator, t: f64) -> Result<Self> {
        check_time(t)?;
        match propagator {
            Propagator::Identity => Ok(self.clone()),
            Propagator::Heat { diffusivity } => heat_flow(self, t, *diffusivity),
            Propagator::Lame(_) => Err(Error::InvalidParams(
                "the Lame flow acts on vector fields".into(),
            )),
        }
    }
}

impl Propagate for VectorField {
    fn propagate(&self, propagator: &Propagator, t: f64) -> Result<Self> {
        check_time(t)?;
        match propagator {
            Propagator::Identity => Ok(self.clone()),
            Propagator::Heat { diffusivity } => heat_flow(self, t, *diffusivity),
            Propagator::Lame(params) => lame_flow(self, t, params),
        }
    }
}

/// A field sampled on a uniform grid `tau_i = i h`, `i = 0..=n`.
#[derive(Clone, Debug)]
pub struct TimeSamples<F> {
    pub times: Vec<f64>,
    pub values: Vec<F>,
}

impl<F> TimeSamples<F> {
    /// Sample `f` at `n + 1` uniform nodes on `[0, t]`.
    pub fn uniform<G: FnMut(f64) -> Result<F>>(t: f64, n: usize, mut f: G) -> Result<Self> {
        if n == 0 {
            return Err(Error::NonUniformGrid("at least one interval required".into()));
        }
        let times: Vec<f64> = (0..=n).map(|i| t * i as f64 / n as f64).collect();
        let values = times.iter().map(|&s| f(s)).collect::<Result<_>>()?;
        Ok(Self { times, values })
    }

    /// Step size after checking the grid starts at 0 and is uniform.
    pub fn step(&self) -> Result<f64> {
        if self.times.len() != self.values.len() {
            return Err(Error::SizeMismatch {
                expected: self.times.len(),
                actual: self.values.len(),
            });
        }
        if self.times.len() < 2 {
            return Err(Error::NonUniformGrid("at least two nodes required".into()));
        }
        if self.times[0] != 0.0 {
            return Err(Error::NonUniformGrid(format!("first node at {}", self.times[0])));
        }
        let n = self.times.len() - 1;
        let h = self.times[n] / n as f64;
        for (i, &s) in self.times.iter().enumerate() {
            if (s - i as f64 * h).abs() > 1e-12 * self.times[n] {
                return Err(Error::NonUniformGrid(format!("node {i} at {s}, expected {}", i as f64 * h)));
            }
        }
        Ok(h)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QuadratureRule {
    Simpson,
    Trapezoid,
}

#[derive(Clone, Debug)]
pub struct DuhamelResult<F> {
    pub value: F,
    pub rule: QuadratureRule,
    /// Set when an odd interval count forced the trapezoid fallback.
    pub warning: Option<String>,
}

/// Composite Simpson weights on `n` intervals of width `h` (`n` even), or
/// trapezoid weights when `n` is odd.
pub fn composite_weights(n: usize, h: f64) -> (Vec<f64>, QuadratureRule) {
    if n % 2 == 0 {
        let mut w: Vec<f64> = (0..=n)
            .map(|i| if i % 2 == 1 { 4.0 } else { 2.0 })
            .collect();
        w[0] = 1.0;
        w[n] = 1.0;
        (w.into_iter().map(|x| x * h / 3.0).collect(), QuadratureRule::Simpson)
    } else {
        let mut w = vec![h; n + 1];
        w[0] = h / 2.0;
        w[n] = h / 2.0;
        (w, QuadratureRule::Trapezoid)
    }
}

/// Weights for `int_0^{tau_i}` using nodes `0..=i` only, for every
/// `i = 0..=n`.
///
/// Even `i`: composite Simpson. Odd `i >= 3`: Simpson on `[0, tau_{i-3}]`
/// plus the 3/8 rule on the last three intervals. `i = 1`: trapezoid.
pub fn cumulative_weights(n: usize, h: f64) -> Vec<Vec<f64>> {
    (0..=n)
        .map(|i| match i {
            0 => vec![0.0],
            1 => vec![h / 2.0, h / 2.0],
            _ if i % 2 == 0 => composite_weights(i, h).0,
            _ => {
                let mut w = vec![0.0; i + 1];
                if i > 3 {
                    for (j, x) in composite_weights(i - 3, h).0.into_iter().enumerate() {
                        w[j] += x;
                    }
                }
                for (j, c) in [1.0, 3.0, 3.0, 1.0].into_iter().enumerate() {
                    w[i - 3 + j] += 3.0 * h / 8.0 * c;
                }
                w
            }
        })
        .collect()
}

/// `int_0^t e^{(t - s) A} F(s) ds` with `t` the last sample time.
pub fn duhamel<F: Propagate>(forcing: &TimeSamples<F>, propagator: &Propagator) -> Result<DuhamelResult<F>> {
    let h = forcing.step()?;
    let n = forcing.times.len() - 1;
    let t = forcing.times[n];
    let (weights, rule) = composite_weights(n, h);
    let mut value = forcing.values[0].zeros_like();
    for ((&s, f), w) in forcing.times.iter().zip(&forcing.values).zip(weights) {
        let g = f.propagate(propagator, (t - s).max(0.0))?;
        value.axpy(w, &g)?;
    }
    let warning = (rule == QuadratureRule::Trapezoid)
        .then(|| format!("odd interval count {n}: trapezoid rule used"));
    Ok(DuhamelResult { value, rule, warning })
}

#[derive(Clone, Debug)]
pub struct AdaptiveResult<F> {
    pub value: F,
    /// Interval count of the accepted result.
    pub intervals: usize,
    pub converged: bool,
    /// Norm of the last change, relative to the norm of the result.
    pub last_change: f64,
}

/// Duhamel integral with the interval count doubled from 64 until
/// successive results differ by less than `1e-8` (relative, in `norm`), or
/// 1024 intervals are reached.
pub fn duhamel_adaptive<F, G, H>(forcing: G, propagator: &Propagator, t: f64, norm: H) -> Result<AdaptiveResult<F>>
where
    F: Propagate,
    G: Fn(f64) -> Result<F>,
    H: Fn(&F) -> Result<f64>,
{
    const START: usize = 64;
    const CAP: usize = 1024;
    const TOL: f64 = 1e-8;
    check_time(t)?;
    let mut n = START;
    let mut prev = duhamel(&TimeSamples::uniform(t, n, &forcing)?, propagator)?.value;
    loop {
        n *= 2;
        let next = duhamel(&TimeSamples::uniform(t, n, &forcing)?, propagator)?.value;
        let mut diff = next.clone();
        diff.axpy(-1.0, &prev)?;
        let scale = norm(&next)?;
        let change = norm(&diff)?;
        let rel = if scale > 0.0 { change / scale } else { change };
        if rel < TOL || n >= CAP {
            return Ok(AdaptiveResult {
                value: next,
                intervals: n,
                converged: rel < TOL,
                last_change: rel,
            });
        }
        prev = next;
    }
}
