//! Direct pseudo-spectral integration of the full nonlinear system with a
//! Lawson (integrating-factor) fourth-order Runge-Kutta scheme.
//!
//! The state lives on the dealiased band of the grid. The stiff linear part
//! (Lame or `mu Lap` for the velocity, `kappa Lap` for the temperature) is
//! applied exactly per mode; everything else is evaluated pointwise.

use num_complex::Complex64;

use super::band::{Band, Coeffs};
use super::{FlowModel, SolutionState};
use crate::error::{Error, Result};
use crate::field::VectorField;
use crate::semigroups::PhysParams;

/// Smallest admissible `1 + rho` on the collocation points.
pub const VACUUM_FLOOR: f64 = 0.1;

/// Largest coefficient tolerated in the outer tenth of the retained band,
/// relative to the largest coefficient overall.
pub const EDGE_TOLERANCE: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq)]
pub struct OracleSettings {
    pub horizon: f64,
    pub steps: usize,
    pub model: FlowModel,
}

impl OracleSettings {
    pub fn new(horizon: f64, steps: usize, model: FlowModel) -> Self {
        Self { horizon, steps, model }
    }

    /// Step count keeping `nu_max |xi_cut|^2 dt <= 5`, at least `minimum`.
    pub fn suggested_steps(grid: &crate::field::GridSpec, params: &PhysParams, horizon: f64, minimum: usize) -> usize {
        let xi2: f64 = grid
            .cutoffs()
            .iter()
            .map(|&c| (c as f64 / grid.scale() as f64).powi(2))
            .sum();
        let nu = params.longitudinal().max(params.viscosity).max(params.conductivity);
        ((nu * xi2 * horizon / 5.0).ceil() as usize).max(minimum)
    }
}

#[derive(Clone)]
struct State {
    rho: Coeffs,
    u: Vec<Coeffs>,
    theta: Coeffs,
}

impl State {
    fn zeros(band: &Band, d: usize) -> Self {
        Self {
            rho: band.zeros(),
            u: vec![band.zeros(); d],
            theta: band.zeros(),
        }
    }

    fn parts_mut(&mut self) -> impl Iterator<Item = &mut Coeffs> {
        std::iter::once(&mut self.rho)
            .chain(self.u.iter_mut())
            .chain(std::iter::once(&mut self.theta))
    }

    fn parts(&self) -> impl Iterator<Item = &Coeffs> {
        std::iter::once(&self.rho)
            .chain(self.u.iter())
            .chain(std::iter::once(&self.theta))
    }

    /// `self + a * other`.
    fn plus(&self, a: f64, other: &State) -> State {
        let mut out = self.clone();
        for (x, y) in out.parts_mut().zip(other.parts()) {
            x.iter_mut().zip(y).for_each(|(p, q)| *p += q * a);
        }
        out
    }

    fn max_abs(&self) -> f64 {
        self.parts()
            .flat_map(|c| c.iter())
            .map(|v| v.norm())
            .fold(0.0, f64::max)
    }
}

/// Exact propagator of the linear part over one fixed time span.
struct Propagator {
    shear: Vec<f64>,
    longitudinal: Vec<f64>,
    thermal: Vec<f64>,
    model: FlowModel,
}

impl Propagator {
    fn new(band: &Band, params: &PhysParams, dt: f64, model: FlowModel) -> Self {
        let table = |rate: f64| band.r2().iter().map(|r| (-rate * r * dt).exp()).collect();
        Self {
            shear: table(params.viscosity),
            longitudinal: table(params.longitudinal()),
            thermal: table(params.conductivity),
            model,
        }
    }

    fn apply(&self, band: &Band, s: &State) -> State {
        let u = match self.model {
            FlowModel::Compressible => band.split_scale(&s.u, &self.longitudinal, &self.shear),
            FlowModel::Incompressible => s
                .u
                .iter()
                .map(|c| c.iter().zip(&self.shear).map(|(v, g)| v * g).collect())
                .collect(),
        };
        let theta = s.theta.iter().zip(&self.thermal).map(|(v, g)| v * g).collect();
        State {
            rho: s.rho.clone(),
            u,
            theta,
        }
    }
}

struct Rhs<'a> {
    band: &'a Band,
    params: &'a PhysParams,
    model: FlowModel,
    d: usize,
}

impl Rhs<'_> {
    /// Nonlinear part of the time derivative, and the smallest `1 + rho`.
    fn eval(&self, s: &State) -> (State, f64) {
        match self.model {
            FlowModel::Compressible => self.compressible(s),
            FlowModel::Incompressible => (self.incompressible(s), 1.0),
        }
    }

    fn incompressible(&self, s: &State) -> State {
        let (band, d) = (self.band, self.d);
        let mut spectra: Vec<Coeffs> = s.u.clone();
        for a in 0..d {
            for b in 0..d {
                spectra.push(band.derivative(&s.u[b], a));
            }
        }
        let values = synthesize(band, &spectra);
        let (u, grad) = values.split_at(d);
        let len = u[0].len();
        let mut adv = vec![vec![0.0; len]; d];
        for c in 0..d {
            for b in 0..d {
                for ((o, x), y) in adv[c].iter_mut().zip(&u[b]).zip(&grad[b * d + c]) {
                    *o -= x * y;
                }
            }
        }
        let refs: Vec<&[f64]> = adv.iter().map(|v| v.as_slice()).collect();
        let mut out = State::zeros(band, d);
        out.u = band.project(&band.analyze(&refs));
        out
    }

    fn compressible(&self, s: &State) -> (State, f64) {
        let (band, d) = (self.band, self.d);
        let mu = self.params.viscosity;
        let lambda = self.params.second_viscosity;
        let long = self.params.longitudinal();
        let par: Vec<f64> = band.r2().iter().map(|r| -long * r).collect();
        let perp: Vec<f64> = band.r2().iter().map(|r| -mu * r).collect();
        let lame = band.split_scale(&s.u, &par, &perp);
        let heat: Coeffs = band
            .laplacian(&s.theta)
            .into_iter()
            .map(|v| v * self.params.conductivity)
            .collect();

        let mut spectra: Vec<Coeffs> = vec![s.rho.clone(), s.theta.clone(), heat];
        spectra.extend(s.u.iter().cloned());
        spectra.extend(lame);
        for a in 0..d {
            spectra.push(band.derivative(&s.rho, a));
        }
        for a in 0..d {
            spectra.push(band.derivative(&s.theta, a));
        }
        for a in 0..d {
            for b in 0..d {
                spectra.push(band.derivative(&s.u[b], a));
            }
        }
        let values = synthesize(band, &spectra);
        let (rho, rest) = values.split_first().expect("density");
        let (theta, rest) = rest.split_first().expect("temperature");
        let (heat, rest) = rest.split_first().expect("conduction");
        let (u, rest) = rest.split_at(d);
        let (lame, rest) = rest.split_at(d);
        let (grad_rho, rest) = rest.split_at(d);
        let (grad_theta, grad) = rest.split_at(d);
        let len = rho.len();

        let min_density = rho.iter().map(|r| 1.0 + r).fold(f64::INFINITY, f64::min);
        let mut flux = vec![vec![0.0; len]; d];
        let mut nu = vec![vec![0.0; len]; d];
        let mut ntheta = vec![0.0; len];
        for idx in 0..len {
            let r = rho[idx];
            let density = 1.0 + r;
            let t = theta[idx];
            let mut div = 0.0;
            for a in 0..d {
                div += grad[a * d + a][idx];
            }
            let mut strain = 0.0;
            for a in 0..d {
                for b in 0..d {
                    let s = grad[a * d + b][idx] + grad[b * d + a][idx];
                    strain += 0.5 * mu * s * s;
                }
            }
            strain += lambda * div * div;
            let mut transport = 0.0;
            for a in 0..d {
                transport += u[a][idx] * grad_theta[a][idx];
            }
            for c in 0..d {
                flux[c][idx] = r * u[c][idx];
                let mut adv = 0.0;
                for b in 0..d {
                    adv += u[b][idx] * grad[b * d + c][idx];
                }
                nu[c][idx] = -r / density * lame[c][idx]
                    - grad_theta[c][idx]
                    - t * grad_rho[c][idx] / density
                    - adv;
            }
            ntheta[idx] = -r / density * heat[idx] - transport - t * div + strain / density;
        }

        let mut fields: Vec<&[f64]> = flux.iter().map(|v| v.as_slice()).collect();
        fields.extend(nu.iter().map(|v| v.as_slice()));
        fields.push(&ntheta);
        let mut spectra = band.analyze(&fields).into_iter();
        let flux_hat: Vec<Coeffs> = spectra.by_ref().take(d).collect();
        let u_hat: Vec<Coeffs> = spectra.by_ref().take(d).collect();
        let theta_hat = spectra.next().expect("temperature rate");

        let mut rho_rate = band.divergence(&s.u);
        for (a, b) in rho_rate.iter_mut().zip(band.divergence(&flux_hat)) {
            *a = -(*a + b);
        }
        (
            State {
                rho: rho_rate,
                u: u_hat,
                theta: theta_hat,
            },
            min_density,
        )
    }
}

fn synthesize(band: &Band, spectra: &[Coeffs]) -> Vec<Vec<f64>> {
    let refs: Vec<&[Complex64]> = spectra.iter().map(|c| c.as_slice()).collect();
    band.synthesize(&refs)
}

fn check_vacuum(step: usize, min_density: f64) -> Result<()> {
    if !(min_density > VACUUM_FLOOR) {
        return Err(Error::Vacuum { step, min_density });
    }
    Ok(())
}

/// Content of the outer tenth of the band relative to the peak.
fn edge_fraction(band: &Band, s: &State) -> f64 {
    let peak = s.max_abs();
    if peak == 0.0 {
        return 0.0;
    }
    let grid = band.grid();
    let d = grid.dim();
    let limits: Vec<f64> = band.extent().iter().map(|&e| 0.9 * e as f64).collect();
    let mut edge = 0.0f64;
    for e in 0..band.len() {
        let xi = band.xi(e);
        let outer = (0..d).any(|a| (xi[a] * grid.scale() as f64).abs() > limits[a]);
        if outer {
            for part in s.parts() {
                edge = edge.max(part[e].norm());
            }
        }
    }
    edge / peak
}

/// Integrates from `initial` over `settings.horizon` in `settings.steps`
/// equal steps. In incompressible mode density and temperature are ignored
/// and the velocity is projected onto divergence-free fields first.
pub fn reference_integrate(
    initial: &SolutionState,
    params: &PhysParams,
    settings: &OracleSettings,
) -> Result<SolutionState> {
    params.validate()?;
    if settings.steps == 0 {
        return Err(Error::InvalidParams("at least one step is required".into()));
    }
    if !(settings.horizon >= 0.0) || !settings.horizon.is_finite() {
        return Err(Error::NegativeTime(settings.horizon));
    }
    let grid = initial.velocity.grid().clone();
    grid.check_same(initial.density.grid())?;
    grid.check_same(initial.temperature.grid())?;
    let d = grid.dim();
    let model = settings.model;
    for c in initial.velocity.components() {
        c.check_within_cutoff()?;
    }
    if model == FlowModel::Compressible {
        initial.density.check_within_cutoff()?;
        initial.temperature.check_within_cutoff()?;
    }

    let band = Band::new(&grid, &grid.cutoffs());
    let mut state = State::zeros(&band, d);
    state.u = initial.velocity.components().iter().map(|c| band.gather(c)).collect();
    match model {
        FlowModel::Compressible => {
            state.rho = band.gather(&initial.density);
            state.theta = band.gather(&initial.temperature);
            check_vacuum(0, initial.min_density())?;
        }
        FlowModel::Incompressible => state.u = band.project(&state.u),
    }

    let dt = settings.horizon / settings.steps as f64;
    let full = Propagator::new(&band, params, dt, model);
    let half = Propagator::new(&band, params, dt / 2.0, model);
    let rhs = Rhs {
        band: &band,
        params,
        model,
        d,
    };
    for step in 0..settings.steps {
        let (k1, min_density) = rhs.eval(&state);
        check_vacuum(step, min_density)?;
        let k1 = scaled(&k1, dt);
        let half_state = half.apply(&band, &state);
        let (k2, _) = rhs.eval(&half.apply(&band, &state.plus(0.5, &k1)));
        let k2 = scaled(&k2, dt);
        let (k3, _) = rhs.eval(&half_state.plus(0.5, &k2));
        let k3 = scaled(&k3, dt);
        let full_state = full.apply(&band, &state);
        let (k4, _) = rhs.eval(&full_state.plus(1.0, &half.apply(&band, &k3)));
        let k4 = scaled(&k4, dt);
        let mid = half.apply(&band, &k2.plus(1.0, &k3));
        let mut next = full_state.plus(1.0 / 6.0, &full.apply(&band, &k1));
        next = next.plus(1.0 / 3.0, &mid);
        next = next.plus(1.0 / 6.0, &k4);
        state = next;
        if state.parts().flat_map(|c| c.iter()).any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::Vacuum {
                step,
                min_density: f64::NAN,
            });
        }
        let fraction = edge_fraction(&band, &state);
        if fraction > EDGE_TOLERANCE {
            return Err(Error::Unresolved { step, fraction });
        }
    }

    let velocity = VectorField::new(state.u.iter().map(|c| band.to_field(c)).collect())?;
    let mut out = SolutionState::from_velocity(velocity);
    out.time = settings.horizon;
    if model == FlowModel::Compressible {
        out.density = band.to_field(&state.rho);
        out.temperature = band.to_field(&state.theta);
        check_vacuum(settings.steps, out.min_density())?;
    }
    Ok(out)
}

fn scaled(s: &State, a: f64) -> State {
    let mut out = s.clone();
    for part in out.parts_mut() {
        part.iter_mut().for_each(|v| *v *= a);
    }
    out
}
