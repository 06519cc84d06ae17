use num_complex::Complex64;

use super::band::{Band, Coeffs};
use super::FlowModel;
use crate::error::{Error, Result};
use crate::field::{GridSpec, SpectralField, VectorField};
use crate::semigroups::{cumulative_weights, PhysParams};

/// Truncation order, time grid and model of an expansion run.
#[derive(Clone, Debug, PartialEq)]
pub struct ExpansionSettings {
    /// Highest order `K >= 1`.
    pub order: usize,
    /// Final time `T`.
    pub horizon: f64,
    /// Number of uniform intervals on `[0, T]`.
    pub intervals: usize,
    pub model: FlowModel,
    /// When set, `T <= 2^{-2N}` is enforced for this level `N`.
    pub level: Option<u32>,
}

impl ExpansionSettings {
    pub fn new(order: usize, horizon: f64) -> Self {
        Self {
            order,
            horizon,
            intervals: 16,
            model: FlowModel::Compressible,
            level: None,
        }
    }

    pub fn with_intervals(mut self, intervals: usize) -> Self {
        self.intervals = intervals;
        self
    }

    pub fn with_model(mut self, model: FlowModel) -> Self {
        self.model = model;
        self
    }

    pub fn with_level(mut self, level: u32) -> Self {
        self.level = Some(level);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.order == 0 {
            return Err(Error::InvalidParams("expansion order must be at least 1".into()));
        }
        if self.intervals == 0 {
            return Err(Error::InvalidParams("at least one time interval is required".into()));
        }
        if !(self.horizon >= 0.0) || !self.horizon.is_finite() {
            return Err(Error::NegativeTime(self.horizon));
        }
        if let Some(level) = self.level {
            let limit = (-2.0 * level as f64).exp2();
            if self.horizon > limit * (1.0 + 1e-12) {
                return Err(Error::InvalidParams(format!(
                    "horizon {} exceeds 2^(-2N) = {limit} for N = {level}",
                    self.horizon
                )));
            }
        }
        Ok(())
    }
}

/// Values of one expansion order at every node, plus the forcings that
/// define them. Absent entries are identically zero.
#[derive(Clone, Debug)]
struct OrderSeries {
    band: Band,
    velocity: Vec<Vec<Coeffs>>,
    density: Vec<Option<Coeffs>>,
    temperature: Vec<Option<Coeffs>>,
    velocity_forcing: Vec<Option<Vec<Coeffs>>>,
    temperature_forcing: Vec<Option<Coeffs>>,
}

/// The orders `(P_k, U_k, Theta_k)`, `k = 1..=K`, on a uniform node grid.
#[derive(Clone, Debug)]
pub struct ExpansionSeries {
    grid: GridSpec,
    params: PhysParams,
    settings: ExpansionSettings,
    times: Vec<f64>,
    orders: Vec<OrderSeries>,
}

/// Point values of one order at the current node.
struct NodeValues {
    u: Vec<Vec<f64>>,
    /// `grad[a * d + b] = d_a u_b`.
    grad: Vec<Vec<f64>>,
    du: Vec<Vec<f64>>,
    p: Option<Vec<f64>>,
    theta: Option<Vec<f64>>,
    grad_theta: Option<Vec<Vec<f64>>>,
    dtheta: Option<Vec<f64>>,
}

impl NodeValues {
    fn div(&self, d: usize) -> Vec<f64> {
        let mut out = self.grad[0].clone();
        for a in 1..d {
            add_to(&mut out, &self.grad[a * d + a]);
        }
        out
    }
}

fn add_to(acc: &mut [f64], x: &[f64]) {
    acc.iter_mut().zip(x).for_each(|(a, b)| *a += b);
}

fn add_product(acc: &mut [f64], x: &[f64], y: &[f64]) {
    for ((a, b), c) in acc.iter_mut().zip(x).zip(y) {
        *a += b * c;
    }
}

/// Per-lag decay factors on one band.
struct DecayTables {
    shear: Vec<Vec<f64>>,
    longitudinal: Vec<Vec<f64>>,
    thermal: Vec<Vec<f64>>,
}

impl DecayTables {
    fn new(band: &Band, params: &PhysParams, h: f64, lags: usize, model: FlowModel) -> Self {
        let table = |rate: f64| -> Vec<Vec<f64>> {
            (0..=lags)
                .map(|l| band.r2().iter().map(|r| (-rate * r * h * l as f64).exp()).collect())
                .collect()
        };
        match model {
            FlowModel::Compressible => Self {
                shear: table(params.viscosity),
                longitudinal: table(params.longitudinal()),
                thermal: table(params.conductivity),
            },
            FlowModel::Incompressible => Self {
                shear: table(params.viscosity),
                longitudinal: Vec::new(),
                thermal: Vec::new(),
            },
        }
    }
}

fn weighted_sum<'a, I>(band: &Band, terms: I) -> Coeffs
where
    I: Iterator<Item = (f64, &'a [f64], &'a Coeffs)>,
{
    let mut out = band.zeros();
    for (w, decay, c) in terms {
        for ((o, v), g) in out.iter_mut().zip(c).zip(decay) {
            *o += v * (w * g);
        }
    }
    out
}

fn add_coeffs(acc: &mut Coeffs, x: &[Complex64]) {
    acc.iter_mut().zip(x).for_each(|(a, b)| *a += b);
}

/// Smallest order whose products no longer fit the grid without aliasing.
fn overflow_order(grid: &GridSpec, extent: &[usize], order: usize) -> Option<usize> {
    (1..=order).find(|&k| {
        extent
            .iter()
            .zip(grid.modes())
            .any(|(&e, &m)| 2 * k * e + 1 > m)
    })
}

/// Builds the expansion for initial data `(0, u0, 0)`.
///
/// Orders are built node by node: at node `i` every order `k` needs the
/// lower orders at node `i` (through its forcing) and its own forcing at
/// nodes `0..=i` (through the Duhamel sum).
pub fn compute_expansion(
    u0: &VectorField,
    params: &PhysParams,
    settings: &ExpansionSettings,
) -> Result<ExpansionSeries> {
    settings.validate()?;
    params.validate()?;
    let grid = u0.grid().clone();
    let d = grid.dim();
    if u0.components().iter().any(|c| !c.is_real()) {
        return Err(Error::NotReal);
    }
    let mut extent = vec![0usize; d];
    for c in u0.components() {
        for (e, x) in extent.iter_mut().zip(c.populated_extent(0.0)) {
            *e = (*e).max(x);
        }
    }
    let order = settings.order;
    if let Some(k) = overflow_order(&grid, &extent, order) {
        return Err(Error::FrequencyOverflow {
            order: k,
            required: extent.iter().map(|e| 2 * k * e + 1).collect(),
            cutoff: grid.modes().to_vec(),
        });
    }

    let n = settings.intervals;
    let h = settings.horizon / n as f64;
    let times: Vec<f64> = (0..=n).map(|i| i as f64 * h).collect();
    let weights = cumulative_weights(n, h);
    let model = settings.model;
    let compressible = model == FlowModel::Compressible;

    let bands: Vec<Band> = (1..=order)
        .map(|k| Band::new(&grid, &extent.iter().map(|e| k * e).collect::<Vec<_>>()))
        .collect();
    let decay: Vec<DecayTables> = bands
        .iter()
        .map(|b| DecayTables::new(b, params, h, n, model))
        .collect();
    let mut orders: Vec<OrderSeries> = bands
        .iter()
        .map(|b| OrderSeries {
            band: b.clone(),
            velocity: Vec::with_capacity(n + 1),
            density: Vec::with_capacity(n + 1),
            temperature: Vec::with_capacity(n + 1),
            velocity_forcing: Vec::with_capacity(n + 1),
            temperature_forcing: Vec::with_capacity(n + 1),
        })
        .collect();
    // Divergence forcing of the density, kept only while building.
    let mut density_forcing: Vec<Vec<Coeffs>> = vec![Vec::with_capacity(n + 1); order];

    let u0_band: Vec<Coeffs> = u0.components().iter().map(|c| bands[0].gather(c)).collect();
    let mu = params.viscosity;
    let lambda = params.second_viscosity;
    let kappa = params.conductivity;

    for i in 0..=n {
        let mut values: Vec<NodeValues> = Vec::with_capacity(order);
        // Pair sums sum_{k1+k2=m} u_{k1}.grad u_{k2} and the temperature
        // analogue, indexed by m - 2.
        let mut advection: Vec<Vec<Vec<f64>>> = Vec::new();
        let mut heat_transport: Vec<Vec<f64>> = Vec::new();
        for k in 1..=order {
            let band = &bands[k - 1];
            let tab = &decay[k - 1];
            let series = &mut orders[k - 1];
            let (u_hat, du_hat, p_hat, theta_hat, dtheta_hat): (Vec<Coeffs>, Vec<Coeffs>, _, _, _);
            if k == 1 {
                let g = &tab.shear[i];
                u_hat = u0_band
                    .iter()
                    .map(|c| c.iter().zip(g).map(|(v, x)| v * x).collect::<Coeffs>())
                    .collect::<Vec<_>>();
                du_hat = u_hat.iter().map(|c| band.laplacian(c)).map(|c| scale(c, mu)).collect();
                p_hat = None;
                theta_hat = None;
                dtheta_hat = None;
                series.velocity_forcing.push(None);
                series.temperature_forcing.push(None);
                density_forcing[0].push(band.zeros());
            } else {
                let len = values[0].u[0].len();
                let mut a_k = vec![vec![0.0; len]; d];
                for k1 in 1..k {
                    let (x, y) = (&values[k1 - 1], &values[k - k1 - 1]);
                    for c in 0..d {
                        for b in 0..d {
                            add_product(&mut a_k[c], &x.u[b], &y.grad[b * d + c]);
                        }
                    }
                }
                advection.push(a_k);
                if !compressible {
                    let f_hat = band.project(&analyze_all(band, &advection[k - 2]));
                    let u_new = duhamel_velocity(
                        band,
                        &weights[i],
                        i,
                        &series.velocity_forcing,
                        &f_hat,
                        &tab.shear,
                        None,
                    );
                    du_hat = u_new
                        .iter()
                        .zip(&f_hat)
                        .map(|(u, f)| {
                            let mut r = scale(band.laplacian(u), mu);
                            r.iter_mut().zip(f).for_each(|(a, b)| *a -= b);
                            r
                        })
                        .collect();
                    series.velocity_forcing.push(Some(f_hat));
                    series.temperature_forcing.push(None);
                    u_hat = u_new;
                    p_hat = None;
                    theta_hat = None;
                    dtheta_hat = None;
                } else {
                    let len = values[0].u[0].len();
                    let mut b_k = vec![0.0; len];
                    for k1 in 1..k {
                        let (x, y) = (&values[k1 - 1], &values[k - k1 - 1]);
                        if let Some(gt) = &y.grad_theta {
                            for b in 0..d {
                                add_product(&mut b_k, &x.u[b], &gt[b]);
                            }
                        }
                        if let Some(t) = &x.theta {
                            add_product(&mut b_k, t, &y.div(d));
                        }
                    }
                    heat_transport.push(b_k);

                    let mut f = advection[k - 2].clone();
                    let mut g = heat_transport[k - 2].clone();
                    let mut q = vec![0.0; len];
                    let mut r = vec![vec![0.0; len]; d];
                    for k3 in 1..k {
                        let Some(p) = &values[k3 - 1].p else { continue };
                        let y = &values[k - k3 - 1];
                        if k - k3 >= 2 {
                            for c in 0..d {
                                add_product(&mut f[c], p, &advection[k - k3 - 2][c]);
                            }
                            add_product(&mut g, p, &heat_transport[k - k3 - 2]);
                        }
                        for c in 0..d {
                            add_product(&mut f[c], p, &y.du[c]);
                            add_product(&mut r[c], p, &y.u[c]);
                        }
                        if let Some(dt) = &y.dtheta {
                            add_product(&mut g, p, dt);
                        }
                        if let Some(t) = &y.theta {
                            add_product(&mut q, p, t);
                        }
                    }
                    for k1 in 1..k {
                        let s = strain_pair(&values[k1 - 1], &values[k - k1 - 1], d, mu, lambda);
                        g.iter_mut().zip(&s).for_each(|(a, b)| *a -= b);
                    }

                    let mut fields: Vec<&[f64]> = f.iter().map(|v| v.as_slice()).collect();
                    fields.push(&g);
                    fields.push(&q);
                    fields.extend(r.iter().map(|v| v.as_slice()));
                    let mut spectra = band.analyze(&fields).into_iter();
                    let mut f_hat: Vec<Coeffs> = spectra.by_ref().take(d).collect();
                    let g_hat = spectra.next().expect("temperature forcing");
                    let q_hat = spectra.next().expect("pressure product");
                    let r_hat: Vec<Coeffs> = spectra.collect();

                    let mut theta_new = weighted_sum(
                        band,
                        (0..i)
                            .map(|j| {
                                (
                                    weights[i][j],
                                    tab.thermal[i - j].as_slice(),
                                    series.temperature_forcing[j].as_ref().expect("stored forcing"),
                                )
                            })
                            .chain(std::iter::once((weights[i][i], tab.thermal[0].as_slice(), &g_hat))),
                    );
                    theta_new.iter_mut().for_each(|v| *v = -*v);
                    let mut dtheta = scale(band.laplacian(&theta_new), kappa);
                    dtheta.iter_mut().zip(&g_hat).for_each(|(a, b)| *a -= b);

                    let mut pressure = q_hat;
                    add_coeffs(&mut pressure, &theta_new);
                    for (c, fc) in f_hat.iter_mut().enumerate() {
                        add_coeffs(fc, &band.derivative(&pressure, c));
                    }

                    let u_new = duhamel_velocity(
                        band,
                        &weights[i],
                        i,
                        &series.velocity_forcing,
                        &f_hat,
                        &tab.shear,
                        Some(&tab.longitudinal),
                    );
                    let lame = lame_apply(band, &u_new, mu, params.longitudinal());
                    du_hat = lame
                        .into_iter()
                        .zip(&f_hat)
                        .map(|(mut a, f)| {
                            a.iter_mut().zip(f).for_each(|(x, y)| *x -= y);
                            a
                        })
                        .collect();

                    let mut fp = band.divergence(&u_new);
                    add_coeffs(&mut fp, &band.divergence(&r_hat));
                    let p_new = plain_sum(band, &weights[i], &density_forcing[k - 1], &fp);
                    density_forcing[k - 1].push(fp);

                    series.velocity_forcing.push(Some(f_hat));
                    series.temperature_forcing.push(Some(g_hat));
                    u_hat = u_new;
                    p_hat = Some(p_new);
                    theta_hat = Some(theta_new);
                    dtheta_hat = Some(dtheta);
                }
            }

            if k < order {
                values.push(node_values(band, &u_hat, &du_hat, &p_hat, &theta_hat, &dtheta_hat, compressible));
            }
            series.velocity.push(u_hat);
            series.density.push(p_hat);
            series.temperature.push(theta_hat);
        }
    }

    Ok(ExpansionSeries {
        grid,
        params: *params,
        settings: settings.clone(),
        times,
        orders,
    })
}

fn plain_sum(band: &Band, weights: &[f64], stored: &[Coeffs], current: &Coeffs) -> Coeffs {
    let mut out = band.zeros();
    for (w, c) in weights.iter().zip(stored.iter().chain(std::iter::once(current))) {
        for (o, v) in out.iter_mut().zip(c) {
            *o -= v * *w;
        }
    }
    out
}

fn scale(mut c: Coeffs, a: f64) -> Coeffs {
    c.iter_mut().for_each(|v| *v *= a);
    c
}

fn analyze_all(band: &Band, fields: &[Vec<f64>]) -> Vec<Coeffs> {
    let refs: Vec<&[f64]> = fields.iter().map(|v| v.as_slice()).collect();
    band.analyze(&refs)
}

/// `L u = mu Lap u + (mu + lambda) grad div u` on a band.
fn lame_apply(band: &Band, u: &[Coeffs], mu: f64, longitudinal: f64) -> Vec<Coeffs> {
    let par: Vec<f64> = band.r2().iter().map(|r| -longitudinal * r).collect();
    let perp: Vec<f64> = band.r2().iter().map(|r| -mu * r).collect();
    band.split_scale(u, &par, &perp)
}

/// `-sum_j w_j e^{(tau_i - tau_j) A} F_j` with the current forcing as the
/// last term. Without longitudinal tables the propagator is the scalar
/// shear heat flow.
fn duhamel_velocity(
    band: &Band,
    weights: &[f64],
    i: usize,
    stored: &[Option<Vec<Coeffs>>],
    current: &[Coeffs],
    shear: &[Vec<f64>],
    longitudinal: Option<&Vec<Vec<f64>>>,
) -> Vec<Coeffs> {
    let d = current.len();
    let mut acc = vec![band.zeros(); d];
    for j in 0..=i {
        let f = if j == i {
            current
        } else {
            stored[j].as_deref().expect("stored forcing")
        };
        let w = weights[j];
        match longitudinal {
            None => {
                for c in 0..d {
                    for ((o, v), g) in acc[c].iter_mut().zip(&f[c]).zip(&shear[i - j]) {
                        *o -= v * (w * g);
                    }
                }
            }
            Some(long) => {
                let scaled = band.split_scale(f, &long[i - j], &shear[i - j]);
                for c in 0..d {
                    for (o, v) in acc[c].iter_mut().zip(&scaled[c]) {
                        *o -= v * w;
                    }
                }
            }
        }
    }
    acc
}

/// `2 mu Du:Dv + lambda div u div v` from point values.
fn strain_pair(x: &NodeValues, y: &NodeValues, d: usize, mu: f64, lambda: f64) -> Vec<f64> {
    let len = x.u[0].len();
    let mut out = vec![0.0; len];
    for a in 0..d {
        for b in 0..d {
            let (xa, xb) = (&x.grad[a * d + b], &x.grad[b * d + a]);
            let (ya, yb) = (&y.grad[a * d + b], &y.grad[b * d + a]);
            for (idx, o) in out.iter_mut().enumerate() {
                *o += 0.5 * mu * (xa[idx] + xb[idx]) * (ya[idx] + yb[idx]);
            }
        }
    }
    if lambda != 0.0 {
        let (dx, dy) = (x.div(d), y.div(d));
        for ((o, a), b) in out.iter_mut().zip(&dx).zip(&dy) {
            *o += lambda * a * b;
        }
    }
    out
}

fn node_values(
    band: &Band,
    u: &[Coeffs],
    du: &[Coeffs],
    p: &Option<Coeffs>,
    theta: &Option<Coeffs>,
    dtheta: &Option<Coeffs>,
    compressible: bool,
) -> NodeValues {
    let d = u.len();
    let mut spectra: Vec<Coeffs> = u.to_vec();
    for a in 0..d {
        for b in 0..d {
            spectra.push(band.derivative(&u[b], a));
        }
    }
    if compressible {
        spectra.extend(du.iter().cloned());
    }
    let scalars = [p, theta, dtheta];
    for c in scalars.iter().copied().flatten() {
        spectra.push(c.clone());
    }
    if let Some(t) = theta {
        for a in 0..d {
            spectra.push(band.derivative(t, a));
        }
    }
    let refs: Vec<&[Complex64]> = spectra.iter().map(|c| c.as_slice()).collect();
    let mut values = band.synthesize(&refs).into_iter();
    let u = values.by_ref().take(d).collect();
    let grad = values.by_ref().take(d * d).collect();
    let du = if compressible {
        values.by_ref().take(d).collect()
    } else {
        Vec::new()
    };
    let mut next = |c: &Option<Coeffs>| c.as_ref().map(|_| values.next().expect("synthesized field"));
    let p = next(p);
    let theta_v = next(theta);
    let dtheta = next(dtheta);
    let grad_theta = theta.as_ref().map(|_| values.by_ref().take(d).collect());
    NodeValues {
        u,
        grad,
        du,
        p,
        theta: theta_v,
        grad_theta,
        dtheta,
    }
}

impl ExpansionSeries {
    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn params(&self) -> &PhysParams {
        &self.params
    }

    pub fn settings(&self) -> &ExpansionSettings {
        &self.settings
    }

    pub fn order(&self) -> usize {
        self.settings.order
    }

    pub fn model(&self) -> FlowModel {
        self.settings.model
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    /// Index of the node at time `t`, within a relative tolerance of 1e-9
    /// of the node spacing.
    pub fn node_of(&self, t: f64) -> Result<usize> {
        let n = self.settings.intervals;
        let h = self.settings.horizon / n as f64;
        if h == 0.0 {
            return if t == 0.0 { Ok(0) } else { Err(Error::OffGrid(t)) };
        }
        let x = t / h;
        let i = x.round();
        if !(i >= 0.0 && i <= n as f64) || (x - i).abs() > 1e-9 {
            return Err(Error::OffGrid(t));
        }
        Ok(i as usize)
    }

    fn check(&self, k: usize, node: usize) -> Result<&OrderSeries> {
        if k == 0 || k > self.order() {
            return Err(Error::InvalidParams(format!(
                "order {k} outside 1..={}",
                self.order()
            )));
        }
        if node >= self.times.len() {
            return Err(Error::InvalidParams(format!(
                "node {node} outside 0..{}",
                self.times.len()
            )));
        }
        Ok(&self.orders[k - 1])
    }

    fn scalar(&self, band: &Band, c: Option<&Coeffs>) -> SpectralField {
        match c {
            Some(c) => band.to_field(c),
            None => SpectralField::zeros(&self.grid),
        }
    }

    fn vector(&self, band: &Band, c: Option<&Vec<Coeffs>>) -> VectorField {
        match c {
            Some(c) => VectorField::new(c.iter().map(|x| band.to_field(x)).collect())
                .expect("matching components"),
            None => VectorField::zeros(&self.grid),
        }
    }

    /// `U_k` at node `node`.
    pub fn velocity(&self, k: usize, node: usize) -> Result<VectorField> {
        let s = self.check(k, node)?;
        Ok(self.vector(&s.band, Some(&s.velocity[node])))
    }

    /// `P_k` at node `node`.
    pub fn density(&self, k: usize, node: usize) -> Result<SpectralField> {
        let s = self.check(k, node)?;
        Ok(self.scalar(&s.band, s.density[node].as_ref()))
    }

    /// `Theta_k` at node `node`.
    pub fn temperature(&self, k: usize, node: usize) -> Result<SpectralField> {
        let s = self.check(k, node)?;
        Ok(self.scalar(&s.band, s.temperature[node].as_ref()))
    }

    /// Forcing `F_k` in `U_k = -int e^{(t-s)A} F_k(s) ds`; zero for `k = 1`.
    pub fn velocity_forcing(&self, k: usize, node: usize) -> Result<VectorField> {
        let s = self.check(k, node)?;
        Ok(self.vector(&s.band, s.velocity_forcing[node].as_ref()))
    }

    /// Forcing `G_k` in `Theta_k = -int e^{(t-s) kappa Lap} G_k(s) ds`.
    pub fn temperature_forcing(&self, k: usize, node: usize) -> Result<SpectralField> {
        let s = self.check(k, node)?;
        Ok(self.scalar(&s.band, s.temperature_forcing[node].as_ref()))
    }

    /// `d_t U_k = A U_k - F_k`, with `A` the Lame operator (compressible)
    /// or `mu Lap` (incompressible).
    pub fn velocity_rate(&self, k: usize, node: usize) -> Result<VectorField> {
        let s = self.check(k, node)?;
        let u = &s.velocity[node];
        let mu = self.params.viscosity;
        let mut rate = match self.model() {
            FlowModel::Compressible => lame_apply(&s.band, u, mu, self.params.longitudinal()),
            FlowModel::Incompressible => u.iter().map(|c| scale(s.band.laplacian(c), mu)).collect(),
        };
        if let Some(f) = &s.velocity_forcing[node] {
            for (r, fc) in rate.iter_mut().zip(f) {
                r.iter_mut().zip(fc).for_each(|(a, b)| *a -= b);
            }
        }
        Ok(self.vector(&s.band, Some(&rate)))
    }

    /// `d_t Theta_k = kappa Lap Theta_k - G_k`.
    pub fn temperature_rate(&self, k: usize, node: usize) -> Result<SpectralField> {
        let s = self.check(k, node)?;
        let Some(theta) = &s.temperature[node] else {
            return Ok(SpectralField::zeros(&self.grid));
        };
        let mut rate = scale(s.band.laplacian(theta), self.params.conductivity);
        if let Some(g) = &s.temperature_forcing[node] {
            rate.iter_mut().zip(g).for_each(|(a, b)| *a -= b);
        }
        Ok(s.band.to_field(&rate))
    }
}
