//! Frequency-localized initial data: the 1D bump `phi`, the modulated
//! profile `f_N` and the divergence-free velocity `u0_N`.
//!
//! `phi_hat` is an even bump equal to 1 on `|xi| <= r_inner` and 0 beyond
//! `r_outer`. Then
//!
//! ```text
//! f_N(x)  = phi(x_1) cos(c_N x_1) prod_{i >= 2} phi(x_i),   c_N = 17 * 2^N / 12
//! u0_N    = delta 2^{-dN/p} (-d_2 f_N, d_1 f_N, 0, ..., 0)
//! ```
//!
//! so that the spectrum of `f_N` sits inside `4/3 2^N <= |xi| <= 3/2 2^N`
//! whenever `sqrt(d) r_outer <= 2^N / 12`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::{Exponent, GridSpec, SpectralField, VectorField};
use crate::littlewood_paley::{resolvable_range, CutoffFamily, TransitionProfile};

/// Even spectral bump with a smooth transition between two radii.
#[derive(Clone, Debug)]
pub struct BumpProfile {
    r_inner: f64,
    r_outer: f64,
    transition: TransitionProfile,
}

impl Default for BumpProfile {
    fn default() -> Self {
        Self {
            r_inner: 1.0 / 12.0,
            r_outer: 1.0 / 6.0,
            transition: TransitionProfile::default(),
        }
    }
}

impl BumpProfile {
    pub fn new(r_inner: f64, r_outer: f64, transition: TransitionProfile) -> Result<Self> {
        if !(r_inner > 0.0 && r_inner < r_outer && r_outer.is_finite()) {
            return Err(Error::InvalidParams(format!(
                "bump radii must satisfy 0 < r_inner < r_outer, got {r_inner}, {r_outer}"
            )));
        }
        transition.validate()?;
        Ok(Self {
            r_inner,
            r_outer,
            transition,
        })
    }

    pub fn r_inner(&self) -> f64 {
        self.r_inner
    }

    pub fn r_outer(&self) -> f64 {
        self.r_outer
    }

    /// `phi_hat(xi)`.
    pub fn hat(&self, xi: f64) -> f64 {
        let r = xi.abs();
        if r <= self.r_inner {
            1.0
        } else if r >= self.r_outer {
            0.0
        } else {
            self.transition
                .eval((r - self.r_inner) / (self.r_outer - self.r_inner))
        }
    }

    /// Smallest admissible scale (a multiple of 12) with `r_outer * L >= 4`.
    pub fn minimal_scale(&self) -> u32 {
        let needed = (4.0 / self.r_outer - 1e-9).ceil() as u32;
        needed.div_ceil(12).max(1) * 12
    }

    fn check_resolution(&self, grid: &GridSpec) -> Result<()> {
        let product = self.r_outer * grid.scale() as f64;
        if product < 4.0 - 1e-12 {
            return Err(Error::Resolution {
                product,
                min_scale: self.minimal_scale(),
            });
        }
        Ok(())
    }
}

/// Level, amplitude and exponent of one member of the data family.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DataParams {
    pub level: u32,
    pub amplitude: f64,
    pub exponent: Exponent,
    pub dim: usize,
}

impl DataParams {
    pub fn new(level: u32, amplitude: f64, exponent: Exponent, dim: usize) -> Result<Self> {
        if level == 0 {
            return Err(Error::InvalidParams("level N must be positive".into()));
        }
        if !(amplitude > 0.0 && amplitude < 1.0) {
            return Err(Error::InvalidParams(format!("amplitude {amplitude} not in (0, 1)")));
        }
        if !(2..=3).contains(&dim) {
            return Err(Error::InvalidParams(format!("dimension {dim} not in {{2, 3}}")));
        }
        Ok(Self {
            level,
            amplitude,
            exponent,
            dim,
        })
    }

    /// `delta * 2^{-dN/p}`.
    pub fn prefactor(&self) -> f64 {
        self.amplitude * 2f64.powf(-(self.dim as f64) * self.level as f64 * self.exponent.reciprocal())
    }

    /// `sqrt(d) r_outer <= 2^N / 12`.
    pub fn check_containment(&self, profile: &BumpProfile) -> Result<()> {
        let lhs = (self.dim as f64).sqrt() * profile.r_outer;
        let rhs = 2f64.powi(self.level as i32) / 12.0;
        if lhs > rhs {
            return Err(Error::Containment { lhs, rhs });
        }
        Ok(())
    }
}

/// Carrier frequency `17 * 2^N / 12`.
pub fn carrier(level: u32) -> f64 {
    17.0 * 2f64.powi(level as i32) / 12.0
}

/// Lower and upper radius of the annulus holding the spectrum of `f_N`.
pub fn annulus(level: u32) -> (f64, f64) {
    let s = 2f64.powi(level as i32);
    (4.0 / 3.0 * s, 3.0 / 2.0 * s)
}

/// The 1D bump `phi` on a one-dimensional grid.
pub fn build_phi(profile: &BumpProfile, grid: &GridSpec) -> Result<SpectralField> {
    if grid.dim() != 1 {
        return Err(Error::InvalidGrid(format!("phi lives on a 1D grid, got d = {}", grid.dim())));
    }
    profile.check_resolution(grid)?;
    if profile.r_outer * grid.scale() as f64 >= grid.modes()[0] as f64 / 2.0 {
        return Err(Error::InvalidGrid("bump spectrum exceeds the lattice".into()));
    }
    Ok(SpectralField::from_transform(
        grid,
        |xi| Complex64::new(profile.hat(xi[0]), 0.0),
        true,
    ))
}

/// Largest `|phi|` at the collocation point farthest from the origin.
pub fn boundary_magnitude(phi: &SpectralField) -> f64 {
    let samples = phi.to_physical();
    samples.values()[phi.grid().modes()[0] / 2].norm()
}

/// `||phi||_{L^p(R)}` approximated on a wide 1D box.
pub fn profile_lp_norm(profile: &BumpProfile, p: Exponent) -> Result<f64> {
    let scale = 384;
    let modes = ((profile.r_outer * scale as f64 * 8.0) as usize).next_power_of_two().max(1024);
    let grid = GridSpec::anisotropic(scale, vec![modes])?;
    build_phi(profile, &grid)?.lp_norm(p)
}

pub fn build_f_n(profile: &BumpProfile, level: u32, grid: &GridSpec) -> Result<SpectralField> {
    profile.check_resolution(grid)?;
    let scale = grid.scale() as u64;
    if (17u64 << level) * scale % 12 != 0 {
        return Err(Error::CarrierOffLattice {
            level,
            scale: grid.scale(),
        });
    }
    let c = carrier(level);
    let l = grid.scale() as f64;
    if (c + profile.r_outer) * l >= grid.modes()[0] as f64 / 2.0 {
        return Err(Error::InvalidGrid(format!(
            "axis 0 Nyquist {} does not exceed the spectrum of f_N",
            grid.nyquist(0)
        )));
    }
    for a in 1..grid.dim() {
        if profile.r_outer * l >= grid.modes()[a] as f64 / 2.0 {
            return Err(Error::InvalidGrid(format!("axis {a} cannot hold the bump")));
        }
    }
    Ok(SpectralField::from_transform(
        grid,
        |xi| {
            let along = 0.5 * (profile.hat(xi[0] - c) + profile.hat(xi[0] + c));
            let across: f64 = xi[1..].iter().map(|&x| profile.hat(x)).product();
            Complex64::new(along * across, 0.0)
        },
        true,
    ))
}

pub fn build_u0n(params: &DataParams, profile: &BumpProfile, grid: &GridSpec) -> Result<VectorField> {
    if grid.dim() != params.dim {
        return Err(Error::InvalidGrid(format!(
            "grid dimension {} differs from data dimension {}",
            grid.dim(),
            params.dim
        )));
    }
    params.check_containment(profile)?;
    let f = build_f_n(profile, params.level, grid)?;
    let a = params.prefactor();
    let mut components = vec![f.derivative(1).scaled(-a), f.derivative(0).scaled(a)];
    components.extend((2..grid.dim()).map(|_| SpectralField::zeros(grid)));
    VectorField::new(components)
}

/// Outcome of [`verify_localization`].
#[derive(Clone, Debug, PartialEq)]
pub struct LocalizationReport {
    /// Largest coefficient magnitude at frequencies outside the level-`N` annulus.
    pub outside_annulus: f64,
    /// `(j, sum |coefficient|^2)` of every resolvable block.
    pub block_energies: Vec<(i32, f64)>,
    pub single_block: bool,
    /// Levels other than `N` carrying energy.
    pub offending_levels: Vec<i32>,
}

/// Check that `u` lives in the annulus of level `level` and in its block only.
pub fn verify_localization(family: &CutoffFamily, u: &VectorField, level: u32) -> Result<LocalizationReport> {
    let grid = u.grid();
    let (lo, hi) = annulus(level);
    let tol = 1e-12 * hi;
    let mut outside = 0.0f64;
    let r2 = grid.frequency_squared();
    for c in u.components() {
        for (coef, &x) in c.coeffs().iter().zip(&r2) {
            let r = x.sqrt();
            if r < lo - tol || r > hi + tol {
                outside = outside.max(coef.norm());
            }
        }
    }
    let total: f64 = u.components().iter().map(|c| c.energy()).sum();
    let mut block_energies = Vec::new();
    let mut offending_levels = Vec::new();
    for j in resolvable_range(grid).levels() {
        let e: f64 = family
            .dyadic_block(u, j)?
            .components()
            .iter()
            .map(|c| c.energy())
            .sum();
        if j != level as i32 && e > 1e-24 * total {
            offending_levels.push(j);
        }
        block_energies.push((j, e));
    }
    Ok(LocalizationReport {
        outside_annulus: outside,
        block_energies,
        single_block: offending_levels.is_empty(),
        offending_levels,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::FieldLike;
    use crate::littlewood_paley::{build_cutoffs, BesovIndex};

    fn grid_for(level: u32) -> GridSpec {
        GridSpec::anisotropic(24, vec![512 << (level - 2), 32]).unwrap()
    }

    fn params(level: u32, p: Exponent) -> DataParams {
        DataParams::new(level, 0.1, p, 2).unwrap()
    }

    #[test]
    fn phi_basics() {
        let profile = BumpProfile::default();
        assert_eq!(profile.hat(0.0), 1.0);
        assert_eq!(profile.hat(0.2), 0.0);
        let grid = GridSpec::anisotropic(24, vec![64]).unwrap();
        let phi = build_phi(&profile, &grid).unwrap();
        // phi_hat(0) = 1 means the mean coefficient is 1 / (2 pi L).
        assert!((phi.coeffs()[0].re * grid.box_volume() - 1.0).abs() < 1e-15);
        let v = phi.as_complex().to_physical();
        let n = grid.modes()[0];
        for i in 1..n {
            assert!(v.values()[i].im.abs() < 1e-12);
            assert!((v.values()[i].re - v.values()[n - i].re).abs() < 1e-12);
        }
    }

    #[test]
    fn resolution_guard_names_minimal_scale() {
        let profile = BumpProfile::default();
        let grid = GridSpec::anisotropic(12, vec![64]).unwrap();
        match build_phi(&profile, &grid) {
            Err(Error::Resolution { min_scale, .. }) => assert_eq!(min_scale, 24),
            other => panic!("unexpected {other:?}"),
        }
        let narrow = BumpProfile::new(0.02, 0.05, TransitionProfile::default()).unwrap();
        assert_eq!(narrow.minimal_scale(), 84);
    }

    #[test]
    fn phi_l2_matches_profile_quadrature() {
        let profile = BumpProfile::default();
        let grid = GridSpec::anisotropic(384, vec![512]).unwrap();
        let phi = build_phi(&profile, &grid).unwrap();
        let box_value = phi.lp_norm(Exponent::TWO).unwrap().powi(2);
        // (1/2pi) int phi_hat^2 by the trapezoid rule on a fine grid.
        let n = 200_000;
        let h = 2.0 * profile.r_outer() / n as f64;
        let integral: f64 = (0..=n)
            .map(|i| profile.hat(-profile.r_outer() + i as f64 * h).powi(2))
            .sum::<f64>()
            * h;
        let expect = integral / (2.0 * std::f64::consts::PI);
        assert!((box_value - expect).abs() < 1e-8 * expect, "{box_value} vs {expect}");
    }

    #[test]
    fn f_n_spectrum_and_blocks() {
        let family = build_cutoffs(TransitionProfile::default()).unwrap();
        let profile = BumpProfile::default();
        for level in 2..=4 {
            let grid = grid_for(level);
            let f = build_f_n(&profile, level, &grid).unwrap();
            let (lo, hi) = annulus(level);
            let (rmin, rmax) = f.frequency_range(0.0).unwrap();
            assert!(rmin >= lo && rmax <= hi, "N={level}: [{rmin}, {rmax}]");
            for j in resolvable_range(&grid).levels() {
                let b = family.dyadic_block(&f, j).unwrap();
                if j == level as i32 {
                    assert!(b.relative_distance(&f) < 1e-12);
                } else {
                    assert!(b.max_abs_coeff() < 1e-12 * f.max_abs_coeff());
                }
            }
            let lap = f.laplacian().lp_norm(Exponent::TWO).unwrap() / f.lp_norm(Exponent::TWO).unwrap();
            assert!(lap >= lo * lo && lap <= hi * hi);
        }
    }

    #[test]
    fn f_n_at_origin_is_phi_power() {
        let profile = BumpProfile::default();
        let grid = grid_for(2);
        let f = build_f_n(&profile, 2, &grid).unwrap();
        let line = GridSpec::anisotropic(24, vec![32]).unwrap();
        let phi0 = build_phi(&profile, &line).unwrap().to_physical().values()[0].re;
        let f0 = f.to_physical().values()[0].re;
        assert!((f0 - phi0 * phi0).abs() < 1e-13 * f0.abs());
    }

    #[test]
    fn carrier_is_on_lattice_for_admissible_scales() {
        let profile = BumpProfile::default();
        let grid = GridSpec::anisotropic(36, vec![2048, 32]).unwrap();
        for level in 1..=3 {
            let f = build_f_n(&profile, level, &grid).unwrap();
            let m = (carrier(level) * 36.0).round() as i64;
            assert!(f.coeff(&[m, 0]).unwrap().re > 0.0);
        }
        assert!(GridSpec::anisotropic(30, vec![1024, 32]).is_err());
        let coarse = GridSpec::anisotropic(24, vec![128, 32]).unwrap();
        assert!(matches!(build_f_n(&profile, 3, &coarse), Err(Error::InvalidGrid(_))));
    }

    #[test]
    fn containment_constraint() {
        let profile = BumpProfile::default();
        let p = DataParams::new(1, 0.1, Exponent::TWO, 2).unwrap();
        assert!(matches!(p.check_containment(&profile), Err(Error::Containment { .. })));
        assert!(params(2, Exponent::TWO).check_containment(&profile).is_ok());
        assert!(DataParams::new(2, 1.5, Exponent::TWO, 2).is_err());
    }

    #[test]
    fn u0n_is_divergence_free_and_homogeneous() {
        let profile = BumpProfile::default();
        let grid = grid_for(3);
        let p1 = params(3, Exponent::TWO);
        let u = build_u0n(&p1, &profile, &grid).unwrap();
        let div = u.divergence().lp_norm(Exponent::INFINITY).unwrap();
        assert!(div < 1e-13 * u.lp_norm(Exponent::INFINITY).unwrap());
        let p2 = DataParams { amplitude: 0.2, ..p1 };
        let v = build_u0n(&p2, &profile, &grid).unwrap();
        for (a, b) in u.components().iter().zip(v.components()) {
            for (x, y) in a.coeffs().iter().zip(b.coeffs()) {
                assert_eq!(*x * 2.0, *y);
            }
        }
    }

    #[test]
    fn three_dimensional_data_has_zero_third_component() {
        let profile = BumpProfile::default();
        let grid = GridSpec::anisotropic(24, vec![512, 16, 16]).unwrap();
        let p = DataParams::new(2, 0.1, Exponent::TWO, 3).unwrap();
        let u = build_u0n(&p, &profile, &grid).unwrap();
        assert!(u.component(2).is_zero());
        assert!(u.divergence().max_abs_coeff() < 1e-13 * u.max_abs_coeff());
    }

    #[test]
    fn single_block_scaling_is_level_independent() {
        let family = build_cutoffs(TransitionProfile::default()).unwrap();
        let profile = BumpProfile::default();
        for p in [Exponent::TWO, Exponent::INFINITY] {
            let d = 2.0;
            let values: Vec<f64> = (2..=4)
                .map(|level| {
                    let u = build_u0n(&params(level, p), &profile, &grid_for(level)).unwrap();
                    let block = family.dyadic_block(&u, level as i32).unwrap();
                    2f64.powf(level as f64 * (d * p.reciprocal() - 1.0)) * block.lp_norm(p).unwrap() / 0.1
                })
                .collect();
            let (lo, hi) = min_max(&values);
            assert!(hi / lo - 1.0 < 0.1, "p={p}: {values:?}");
        }
    }

    #[test]
    fn besov_scalings_in_regularity_shift() {
        let family = build_cutoffs(TransitionProfile::default()).unwrap();
        let profile = BumpProfile::default();
        for p in [Exponent::TWO, Exponent::INFINITY] {
            for sigma in [-1.0, 0.0, 1.0] {
                for q in [Exponent::ONE, Exponent::INFINITY] {
                    let idx = BesovIndex::new(2.0 * p.reciprocal() - 1.0 + sigma, p, q);
                    let values: Vec<f64> = (2..=4)
                        .map(|level| {
                            let u = build_u0n(&params(level, p), &profile, &grid_for(level)).unwrap();
                            family.besov_norm_auto(&u, idx).unwrap() / (0.1 * 2f64.powf(sigma * level as f64))
                        })
                        .collect();
                    let (lo, hi) = min_max(&values);
                    assert!(hi / lo - 1.0 < 0.1, "p={p} sigma={sigma} q={q}: {values:?}");
                }
            }
        }
    }

    #[test]
    fn localization_report() {
        let family = build_cutoffs(TransitionProfile::default()).unwrap();
        let profile = BumpProfile::default();
        let grid = grid_for(4);
        let u = build_u0n(&params(4, Exponent::TWO), &profile, &grid).unwrap();
        let rep = verify_localization(&family, &u, 4).unwrap();
        assert!(rep.single_block);
        assert_eq!(rep.outside_annulus, 0.0);
        let on: f64 = rep.block_energies.iter().filter(|e| e.0 == 4).map(|e| e.1).sum();
        assert!(on > 0.0);

        // A tiny mode at |xi| = 17/6 lies in the level-1 plateau.
        let stray = SpectralField::real_mode(&grid, &[68, 0], Complex64::new(1e-6 * u.max_abs_coeff(), 0.0)).unwrap();
        let mut bad = u.clone();
        let comps: Vec<SpectralField> = bad
            .components()
            .iter()
            .enumerate()
            .map(|(i, c)| if i == 0 { c + &stray } else { c.clone() })
            .collect();
        bad = VectorField::new(comps).unwrap();
        let rep = verify_localization(&family, &bad, 4).unwrap();
        assert!(!rep.single_block);
        assert_eq!(rep.offending_levels, vec![1]);
        assert!(rep.outside_annulus > 0.0);

        let zero = u.zeros_like();
        let rep = verify_localization(&family, &zero, 4).unwrap();
        assert!(rep.single_block);
        assert!(rep.block_energies.iter().all(|e| e.1 == 0.0));
    }

    fn min_max(v: &[f64]) -> (f64, f64) {
        v.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &x| (a.min(x), b.max(x)))
    }
}
