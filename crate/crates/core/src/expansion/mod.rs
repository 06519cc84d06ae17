//! Perturbation expansion of the solution issued from `(0, u0, 0)`:
//! `rho = sum P_k`, `u = sum U_k`, `theta = sum Theta_k`, built order by
//! order from Duhamel integrals, and a direct pseudo-spectral integrator
//! used to check it.

mod band;
mod checkpoint;
mod oracle;
mod series;

pub use checkpoint::{write_checkpoint, CheckpointManifest};
pub use oracle::{reference_integrate, OracleSettings};
pub use series::{compute_expansion, ExpansionSeries, ExpansionSettings};

use crate::error::{Error, Result};
use crate::field::{Samples, SpectralField, VectorField};
use crate::semigroups::PhysParams;

/// Which system is expanded or integrated.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FlowModel {
    /// Density, velocity and temperature with the Lame viscous operator.
    Compressible,
    /// Divergence-free velocity only, with the Leray projection.
    Incompressible,
}

impl FlowModel {
    pub fn name(self) -> &'static str {
        match self {
            FlowModel::Compressible => "compressible",
            FlowModel::Incompressible => "incompressible",
        }
    }
}

/// `(rho, u, theta)` at time `time`.
#[derive(Clone, Debug)]
pub struct SolutionState {
    pub density: SpectralField,
    pub velocity: VectorField,
    pub temperature: SpectralField,
    pub time: f64,
}

impl SolutionState {
    /// State `(0, u, 0)` at time zero.
    pub fn from_velocity(velocity: VectorField) -> Self {
        let grid = velocity.grid().clone();
        Self {
            density: SpectralField::zeros(&grid),
            temperature: SpectralField::zeros(&grid),
            velocity,
            time: 0.0,
        }
    }

    /// Smallest value of `1 + rho` over the collocation points.
    pub fn min_density(&self) -> f64 {
        self.density
            .to_physical()
            .values()
            .iter()
            .map(|v| 1.0 + v.re)
            .fold(f64::INFINITY, f64::min)
    }
}

/// `2 mu Du:Dv + lambda div u div v` with `Du` the symmetric gradient,
/// formed pointwise and truncated at the dealiasing cutoff.
pub fn strain_contraction(u: &VectorField, v: &VectorField, params: &PhysParams) -> Result<SpectralField> {
    let grid = u.grid();
    grid.check_same(v.grid())?;
    if u.dim() != v.dim() {
        return Err(Error::GridMismatch(format!(
            "{} vs {} components",
            u.dim(),
            v.dim()
        )));
    }
    let d = u.dim();
    let strain = |w: &VectorField| -> Vec<Vec<f64>> {
        let mut out = Vec::with_capacity(d * d);
        for a in 0..d {
            for b in 0..d {
                let s = &w.component(b).derivative(a) + &w.component(a).derivative(b);
                out.push(s.to_physical().values().iter().map(|x| 0.5 * x.re).collect());
            }
        }
        out
    };
    let (su, sv) = (strain(u), strain(v));
    let mut total = vec![0.0; grid.len()];
    for (x, y) in su.iter().zip(&sv) {
        for ((t, a), b) in total.iter_mut().zip(x).zip(y) {
            *t += 2.0 * params.viscosity * a * b;
        }
    }
    if params.second_viscosity != 0.0 {
        let du = u.divergence().to_physical();
        let dv = v.divergence().to_physical();
        for ((t, a), b) in total.iter_mut().zip(du.values()).zip(dv.values()) {
            *t += params.second_viscosity * a.re * b.re;
        }
    }
    Ok(Samples::from_real(grid.clone(), &total)?.to_spectral_dealiased(true))
}

/// Partial sums over orders `1..=max_order` at the node time `t`.
pub fn assemble_solution(series: &ExpansionSeries, t: f64, max_order: usize) -> Result<SolutionState> {
    if max_order == 0 || max_order > series.order() {
        return Err(Error::InvalidParams(format!(
            "partial order {max_order} outside 1..={}",
            series.order()
        )));
    }
    let node = series.node_of(t)?;
    let mut state = SolutionState::from_velocity(series.velocity(1, node)?);
    state.time = series.times()[node];
    for k in 2..=max_order {
        state.velocity.axpy(1.0, &series.velocity(k, node)?)?;
        state.density.axpy(1.0, &series.density(k, node)?)?;
        state.temperature.axpy(1.0, &series.temperature(k, node)?)?;
    }
    Ok(state)
}
