use std::f64::consts::PI;

use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;

/// Random Hermitian coefficients restricted to `|m_i| <= band`.
fn random_real(grid: &GridSpec, band: usize, rng: &mut ChaCha8Rng) -> SpectralField {
    let mut coeffs = vec![Complex64::default(); grid.len()];
    let d = grid.dim();
    grid.for_each_mode(|flat, m, _| {
        if m.iter().all(|&k| k.unsigned_abs() as usize <= band) {
            coeffs[flat] = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        }
    });
    let raw = SpectralField::new(grid.clone(), coeffs, false).unwrap();
    // Symmetrize: c_m <- (c_m + conj(c_{-m})) / 2.
    let mut sym = raw.coeffs().to_vec();
    let mut neg = [0i64; MAX_DIM];
    grid.for_each_mode(|flat, m, _| {
        for a in 0..d {
            neg[a] = -m[a];
        }
        if let Some(j) = grid.index_of(&neg[..d]) {
            sym[flat] = (raw.coeffs()[flat] + raw.coeffs()[j].conj()) * 0.5;
        } else {
            sym[flat] = Complex64::default();
        }
    });
    SpectralField::new(grid.clone(), sym, true).unwrap()
}

fn direct_synthesis(f: &SpectralField) -> Vec<Complex64> {
    let grid = f.grid();
    let d = grid.dim();
    let h: Vec<f64> = grid.modes().iter().map(|&m| grid.box_side() / m as f64).collect();
    (0..grid.len())
        .map(|x| {
            // Collocation point of flat index x (same row-major layout).
            let mut rest = x;
            let mut pos = [0f64; MAX_DIM];
            for a in (0..d).rev() {
                pos[a] = (rest % grid.modes()[a]) as f64 * h[a];
                rest /= grid.modes()[a];
            }
            let mut sum = Complex64::default();
            grid.for_each_mode(|flat, _, xi| {
                let phase: f64 = (0..d).map(|a| xi[a] * pos[a]).sum();
                sum += f.coeffs()[flat] * Complex64::from_polar(1.0, phase);
            });
            sum
        })
        .collect()
}

fn brute_convolution(f: &SpectralField, g: &SpectralField) -> Vec<Complex64> {
    let grid = f.grid();
    let d = grid.dim();
    let mut out = vec![Complex64::default(); grid.len()];
    let mut sum_mode = [0i64; MAX_DIM];
    grid.for_each_mode(|i, mi, _| {
        if f.coeffs()[i] == Complex64::default() {
            return;
        }
        grid.for_each_mode(|j, mj, _| {
            for a in 0..d {
                sum_mode[a] = mi[a] + mj[a];
            }
            if grid.within_cutoff(&sum_mode[..d]) {
                let k = grid.index_of(&sum_mode[..d]).unwrap();
                out[k] += f.coeffs()[i] * g.coeffs()[j];
            }
        });
    });
    out
}

#[test]
fn single_mode_synthesizes_fourier_basis() {
    let grid = GridSpec::new(2, 12, 8).unwrap();
    let f = SpectralField::single_mode(&grid, &[1, -2], Complex64::new(1.0, 0.0)).unwrap();
    let s = f.to_physical();
    let h = grid.box_side() / 8.0;
    for x in 0..grid.len() {
        let (i, j) = (x / 8, x % 8);
        let expect = Complex64::from_polar(1.0, (1.0 * i as f64 * h - 2.0 * j as f64 * h) / 12.0);
        assert!((s.values()[x] - expect).norm() < 1e-13);
    }
}

#[test]
fn zero_roundtrip() {
    let grid = GridSpec::new(3, 12, 8).unwrap();
    let z = SpectralField::zeros(&grid);
    let s = z.to_physical();
    assert_eq!(s.max_abs(), 0.0);
    assert!(s.to_spectral(true).is_zero());
}

#[test]
fn random_hermitian_matches_direct_summation() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for d in [1usize, 2, 3] {
        let grid = GridSpec::new(d, 12, 8).unwrap();
        let f = random_real(&grid, 4, &mut rng);
        let fast = f.as_complex().to_physical();
        let slow = direct_synthesis(&f);
        let scale = slow.iter().map(|v| v.norm()).fold(0.0, f64::max);
        for (a, b) in fast.values().iter().zip(&slow) {
            assert!((a - b).norm() < 1e-12 * scale);
            assert!(a.im.abs() < 1e-12 * scale);
        }
        let back = fast.to_spectral(false);
        assert!(back.relative_distance(&f) < 1e-12);
    }
}

#[test]
fn rejects_wrong_sample_count() {
    let grid = GridSpec::new(2, 12, 8).unwrap();
    assert!(matches!(
        Samples::new(grid.clone(), vec![Complex64::default(); 63]),
        Err(Error::SizeMismatch { expected: 64, actual: 63 })
    ));
    assert!(SpectralField::new(grid, vec![], true).is_err());
}

#[test]
fn identity_symbol_and_derivative_eigenfunction() {
    let grid = GridSpec::new(2, 12, 16).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let f = random_real(&grid, 5, &mut rng);
    let same = f.fourier_multiplier(|_| Complex64::new(1.0, 0.0)).unwrap();
    assert_eq!(same.coeffs(), f.coeffs());
    assert!(same.is_real());

    let e = SpectralField::single_mode(&grid, &[3, 1], Complex64::new(2.0, 0.5)).unwrap();
    let de = e.fourier_multiplier(|xi| Complex64::new(0.0, xi[0])).unwrap();
    let expect = Complex64::new(2.0, 0.5) * Complex64::new(0.0, 3.0 / 12.0);
    assert!((de.coeff(&[3, 1]).unwrap() - expect).norm() < 1e-15);
    assert!((e.derivative(0).coeff(&[3, 1]).unwrap() - expect).norm() < 1e-15);
}

#[test]
fn non_finite_symbol_names_the_mode() {
    let grid = GridSpec::new(2, 12, 8).unwrap();
    let f = SpectralField::constant(&grid, 1.0);
    let err = f
        .fourier_multiplier(|xi| Complex64::new(1.0 / (xi[0] * xi[0] + xi[1] * xi[1]), 0.0))
        .unwrap_err();
    assert!(matches!(err, Error::NonFiniteSymbol { mode } if mode == vec![0, 0]));
    // Unpopulated singular modes are fine.
    let g = SpectralField::real_mode(&grid, &[1, 0], Complex64::new(1.0, 0.0)).unwrap();
    assert!(g
        .fourier_multiplier(|xi| Complex64::new(1.0 / (xi[0] * xi[0] + xi[1] * xi[1]), 0.0))
        .is_ok());
}

#[test]
fn real_odd_symbols_keep_fields_real() {
    let grid = GridSpec::new(2, 12, 16).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let f = random_real(&grid, 7, &mut rng);
    for axis in 0..2 {
        let df = f.fourier_multiplier(|xi| Complex64::new(0.0, xi[axis])).unwrap();
        assert!(df.is_real());
        let s = df.as_complex().to_physical();
        assert!(s.max_imag() < 1e-12 * s.max_abs().max(1e-300));
    }
    let skew = f.fourier_multiplier(|xi| Complex64::new(xi[0], 0.0)).unwrap();
    assert!(!skew.is_real());
}

#[test]
fn product_identity_and_delta_convolution() {
    let grid = GridSpec::new(2, 12, 16).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let f = random_real(&grid, 5, &mut rng);
    let one = SpectralField::constant(&grid, 1.0);
    let p = f.pointwise_product(&one).unwrap();
    assert!(p.relative_distance(&f) < 1e-13);

    let a = SpectralField::single_mode(&grid, &[2, -1], Complex64::new(1.5, 0.0)).unwrap();
    let b = SpectralField::single_mode(&grid, &[1, 3], Complex64::new(0.0, 2.0)).unwrap();
    let ab = a.pointwise_product(&b).unwrap();
    assert!((ab.coeff(&[3, 2]).unwrap() - Complex64::new(0.0, 3.0)).norm() < 1e-13);
    assert!(ab.energy() - 9.0 < 1e-24);
}

#[test]
fn product_rejects_modes_beyond_cutoff() {
    let grid = GridSpec::new(1, 12, 16).unwrap();
    let f = SpectralField::real_mode(&grid, &[6], Complex64::new(1.0, 0.0)).unwrap();
    assert!(matches!(
        f.pointwise_product(&f),
        Err(Error::BeyondCutoff { .. })
    ));
}

#[test]
fn product_matches_brute_force_convolution() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for (d, m) in [(1usize, 16usize), (2, 8), (2, 16), (3, 8)] {
        let grid = GridSpec::new(d, 12, m).unwrap();
        let band = grid.cutoff(0);
        let f = random_real(&grid, band, &mut rng);
        let g = random_real(&grid, band, &mut rng);
        let fast = f.pointwise_product(&g).unwrap();
        let slow = brute_convolution(&f, &g);
        let scale = slow.iter().map(|c| c.norm()).fold(0.0, f64::max);
        for (a, b) in fast.coeffs().iter().zip(&slow) {
            assert!((a - b).norm() < 1e-12 * scale, "d={d} m={m}");
        }
        // Bilinear and commutative.
        let gf = g.pointwise_product(&f).unwrap();
        assert!(gf.relative_distance(&fast) < 1e-13);
        let f2 = f.scaled(2.5);
        let f2g = f2.pointwise_product(&g).unwrap();
        assert!(f2g.relative_distance(&fast.scaled(2.5)) < 1e-13);
    }
}

#[test]
fn constant_and_single_mode_norms() {
    let grid = GridSpec::new(2, 12, 16).unwrap();
    let c = SpectralField::constant(&grid, -3.0);
    for p in [1.0, 1.5, 2.0, 4.0] {
        let got = c.lp_norm(Exponent::new(p).unwrap()).unwrap();
        let expect = 3.0 * (2.0 * PI * 12.0f64).powf(2.0 / p);
        assert!((got - expect).abs() < 1e-12 * expect);
    }
    // Real part of a e^{i m x}: cos mode with amplitude 2|a| has sup 2|a|.
    let f = SpectralField::real_mode(&grid, &[2, 1], Complex64::new(0.75, 0.0)).unwrap();
    let sup = f.lp_norm(Exponent::INFINITY).unwrap();
    assert!((sup - 1.5).abs() < 1e-10);
    let single = SpectralField::single_mode(&grid, &[2, 1], Complex64::new(0.0, 0.6)).unwrap();
    assert!((single.to_physical().lp_norm(Exponent::INFINITY) - 0.6).abs() < 1e-10);
}

#[test]
fn rejects_sub_unit_exponents() {
    assert!(Exponent::new(0.5).is_err());
    assert_eq!("inf".parse::<Exponent>().unwrap(), Exponent::INFINITY);
    assert_eq!("2".parse::<Exponent>().unwrap(), Exponent::TWO);
}

#[test]
fn parseval_on_random_fields() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for i in 0..100 {
        let d = 1 + i % 3;
        let grid = GridSpec::new(d, 12, if d == 3 { 8 } else { 16 }).unwrap();
        let f = random_real(&grid, grid.modes()[0] / 2 - 1, &mut rng);
        let l2 = f.lp_norm(Exponent::TWO).unwrap();
        let plancherel = f.plancherel_norm();
        assert!((l2 * l2 - plancherel * plancherel).abs() < 1e-12 * plancherel * plancherel);
    }
}

#[test]
fn vector_norm_is_sum_of_components() {
    let grid = GridSpec::new(2, 12, 16).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let u = VectorField::new(vec![random_real(&grid, 4, &mut rng), random_real(&grid, 4, &mut rng)])
        .unwrap();
    let p = Exponent::new(3.0).unwrap();
    let sum = u.component(0).lp_norm(p).unwrap() + u.component(1).lp_norm(p).unwrap();
    assert!((u.lp_norm(p).unwrap() - sum).abs() < 1e-14 * sum);
    assert!(u.magnitude_lp_norm(Exponent::TWO).unwrap() <= u.lp_norm(Exponent::TWO).unwrap());
}

#[test]
fn vector_rejects_mixed_grids() {
    let a = SpectralField::zeros(&GridSpec::new(2, 12, 8).unwrap());
    let b = SpectralField::zeros(&GridSpec::new(2, 12, 10).unwrap());
    assert!(VectorField::new(vec![a.clone(), b]).is_err());
    assert!(VectorField::new(vec![a]).is_err());
}

#[test]
fn dilation_doubles_frequencies() {
    let grid = GridSpec::new(2, 24, 16).unwrap();
    let f = SpectralField::real_mode(&grid, &[3, 1], Complex64::new(1.0, 0.0)).unwrap();
    let g = f.dilated().unwrap();
    assert_eq!(g.grid().scale(), 12);
    let fp = f.to_physical();
    let gp = g.to_physical();
    // Same collocation values, on a box of half the side.
    assert_eq!(fp.values(), gp.values());
    let p = Exponent::new(3.0).unwrap();
    let ratio = g.lp_norm(p).unwrap() / f.lp_norm(p).unwrap();
    assert!((ratio - 2f64.powf(-2.0 / 3.0)).abs() < 1e-13);
}

fn small_field() -> impl Strategy<Value = (Vec<(f64, f64)>, Vec<(f64, f64)>)> {
    let pair = (-1.0..1.0f64, -1.0..1.0f64);
    (
        proptest::collection::vec(pair.clone(), 64),
        proptest::collection::vec(pair, 64),
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn multiplier_composition_is_exact((a, _) in small_field(), s1 in 0.1..3.0f64, s2 in -2.0..2.0f64) {
        let grid = GridSpec::new(2, 12, 8).unwrap();
        let coeffs = a.iter().map(|&(r, i)| Complex64::new(r, i)).collect();
        let f = SpectralField::new(grid, coeffs, false).unwrap();
        let sym1 = |xi: &[f64]| Complex64::new((-s1 * (xi[0] * xi[0] + xi[1] * xi[1])).exp(), 0.0);
        let sym2 = |xi: &[f64]| Complex64::new(0.0, s2 * xi[1]);
        let two_step = f.fourier_multiplier(sym1).unwrap().fourier_multiplier(sym2).unwrap();
        let one_step = f.fourier_multiplier(|xi| sym1(xi) * sym2(xi)).unwrap();
        prop_assert!(two_step.relative_distance(&one_step) < 1e-15);
    }

    #[test]
    fn roundtrip_is_identity_and_linear((a, b) in small_field(), alpha in -3.0..3.0f64) {
        let grid = GridSpec::new(2, 12, 8).unwrap();
        let f = SpectralField::new(grid.clone(), a.iter().map(|&(r, i)| Complex64::new(r, i)).collect(), false).unwrap();
        let g = SpectralField::new(grid, b.iter().map(|&(r, i)| Complex64::new(r, i)).collect(), false).unwrap();
        let back = f.to_physical().to_spectral(false);
        prop_assert!(back.relative_distance(&f) < 1e-12);
        let mut combo = f.clone();
        combo.axpy(alpha, &g).unwrap();
        let lhs = combo.to_physical();
        let fp = f.to_physical();
        let gp = g.to_physical();
        for ((l, x), y) in lhs.values().iter().zip(fp.values()).zip(gp.values()) {
            prop_assert!((l - (x + y * alpha)).norm() < 1e-12 * (1.0 + x.norm() + y.norm() * alpha.abs()));
        }
    }
}
