//! Compact storage of real fields whose spectrum lies in a centered box of
//! modes `|m_i| <= extent_i`, with paired real transforms to and from the
//! full collocation lattice.

use num_complex::Complex64;
use rustfft::FftDirection;

use crate::field::fft::transform;
use crate::field::{GridSpec, SpectralField, MAX_DIM};

pub(crate) type Coeffs = Vec<Complex64>;

#[derive(Clone, Debug)]
pub(crate) struct Band {
    grid: GridSpec,
    extent: Vec<usize>,
    /// Full-grid storage index of every entry.
    index: Vec<usize>,
    /// Entry holding the mode `-m`.
    mirror: Vec<usize>,
    xi: Vec<[f64; MAX_DIM]>,
    r2: Vec<f64>,
}

impl Band {
    /// `extent` must stay below `M_i / 2` on every axis.
    pub fn new(grid: &GridSpec, extent: &[usize]) -> Self {
        let d = grid.dim();
        debug_assert!(extent.iter().zip(grid.modes()).all(|(&e, &m)| e < m / 2));
        let mut index = Vec::new();
        let mut xi = Vec::new();
        let mut r2 = Vec::new();
        let mut position = vec![usize::MAX; grid.len()];
        grid.for_each_mode(|flat, m, x| {
            if m.iter().zip(extent).all(|(&mi, &e)| mi.unsigned_abs() as usize <= e) {
                position[flat] = index.len();
                index.push(flat);
                let mut v = [0.0; MAX_DIM];
                v[..d].copy_from_slice(x);
                xi.push(v);
                r2.push(x.iter().map(|a| a * a).sum());
            }
        });
        let mut neg = [0i64; MAX_DIM];
        let mirror = index
            .iter()
            .map(|&flat| {
                let m = grid.mode_of(flat);
                for a in 0..d {
                    neg[a] = -m[a];
                }
                position[grid.index_of(&neg[..d]).expect("band is symmetric")]
            })
            .collect();
        Self {
            grid: grid.clone(),
            extent: extent.to_vec(),
            index,
            mirror,
            xi,
            r2,
        }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn extent(&self) -> &[usize] {
        &self.extent
    }

    pub fn len(&self) -> usize {
        self.index.len()
    }

    pub fn xi(&self, entry: usize) -> &[f64] {
        &self.xi[entry][..self.grid.dim()]
    }

    pub fn r2(&self) -> &[f64] {
        &self.r2
    }

    pub fn zeros(&self) -> Coeffs {
        vec![Complex64::default(); self.len()]
    }

    pub fn gather(&self, f: &SpectralField) -> Coeffs {
        self.index.iter().map(|&i| f.coeffs()[i]).collect()
    }

    pub fn to_field(&self, c: &[Complex64]) -> SpectralField {
        let mut full = vec![Complex64::default(); self.grid.len()];
        for (&i, v) in self.index.iter().zip(c) {
            full[i] = *v;
        }
        SpectralField::new(self.grid.clone(), full, true).expect("band grid")
    }

    /// `i xi_axis c`.
    pub fn derivative(&self, c: &[Complex64], axis: usize) -> Coeffs {
        c.iter()
            .zip(&self.xi)
            .map(|(v, x)| v * Complex64::new(0.0, x[axis]))
            .collect()
    }

    /// `-|xi|^2 c`.
    pub fn laplacian(&self, c: &[Complex64]) -> Coeffs {
        c.iter().zip(&self.r2).map(|(v, r)| -v * r).collect()
    }

    pub fn divergence(&self, u: &[Coeffs]) -> Coeffs {
        let mut out = self.zeros();
        for (a, comp) in u.iter().enumerate() {
            for ((o, v), x) in out.iter_mut().zip(comp).zip(&self.xi) {
                *o += v * Complex64::new(0.0, x[a]);
            }
        }
        out
    }

    /// `xi (xi . u) / |xi|^2` scaled by `parallel` plus the remainder scaled
    /// by `perp`, entry by entry. The zero mode is scaled by `perp`.
    pub fn split_scale(&self, u: &[Coeffs], parallel: &[f64], perp: &[f64]) -> Vec<Coeffs> {
        let d = u.len();
        let mut out = vec![self.zeros(); d];
        for e in 0..self.len() {
            let r2 = self.r2[e];
            if r2 == 0.0 {
                for a in 0..d {
                    out[a][e] = u[a][e] * perp[e];
                }
                continue;
            }
            let x = &self.xi[e];
            let dot: Complex64 = (0..d).map(|a| u[a][e] * x[a]).sum::<Complex64>() / r2;
            for a in 0..d {
                let par = dot * x[a];
                out[a][e] = par * parallel[e] + (u[a][e] - par) * perp[e];
            }
        }
        out
    }

    /// Leray projection `u - xi (xi . u) / |xi|^2`.
    pub fn project(&self, u: &[Coeffs]) -> Vec<Coeffs> {
        let zero = vec![0.0; self.len()];
        let one = vec![1.0; self.len()];
        self.split_scale(u, &zero, &one)
    }

    /// Point values of real fields, two per complex transform.
    pub fn synthesize(&self, fields: &[&[Complex64]]) -> Vec<Vec<f64>> {
        let mut out = Vec::with_capacity(fields.len());
        for pair in fields.chunks(2) {
            let mut buf = vec![Complex64::default(); self.grid.len()];
            let i = Complex64::new(0.0, 1.0);
            for (e, &flat) in self.index.iter().enumerate() {
                buf[flat] = pair[0][e];
                if let Some(b) = pair.get(1) {
                    buf[flat] += i * b[e];
                }
            }
            transform(self.grid.modes(), &mut buf, FftDirection::Inverse);
            out.push(buf.iter().map(|v| v.re).collect());
            if pair.len() == 2 {
                out.push(buf.iter().map(|v| v.im).collect());
            }
        }
        out
    }

    /// Band coefficients of real point values, two per complex transform.
    /// Content outside the band is discarded.
    pub fn analyze(&self, fields: &[&[f64]]) -> Vec<Coeffs> {
        let norm = 1.0 / self.grid.len() as f64;
        let mut out = Vec::with_capacity(fields.len());
        for pair in fields.chunks(2) {
            let mut buf: Vec<Complex64> = match pair {
                [f, g] => f.iter().zip(g.iter()).map(|(&a, &b)| Complex64::new(a, b)).collect(),
                [f] => f.iter().map(|&a| Complex64::new(a, 0.0)).collect(),
                _ => unreachable!(),
            };
            transform(self.grid.modes(), &mut buf, FftDirection::Forward);
            if pair.len() == 1 {
                out.push(self.index.iter().map(|&i| buf[i] * norm).collect());
                continue;
            }
            let mut a = self.zeros();
            let mut b = self.zeros();
            for e in 0..self.len() {
                let h = buf[self.index[e]];
                let hm = buf[self.index[self.mirror[e]]].conj();
                a[e] = (h + hm) * (0.5 * norm);
                b[e] = (h - hm) * Complex64::new(0.0, -0.5 * norm);
            }
            out.push(a);
            out.push(b);
        }
        out
    }
}
