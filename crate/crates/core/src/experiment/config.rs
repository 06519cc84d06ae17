use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::field::{Exponent, GridSpec};
use crate::initial_data::{BumpProfile, DataParams};
use crate::semigroups::PhysParams;

/// Everything a batch of runs depends on. Loaded from a flat `key = value`
/// text file; every key maps to one field below.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    /// `dim`: space dimension.
    pub dim: usize,
    /// `p`: Lebesgue exponents, comma separated (`inf` allowed).
    pub exponents: Vec<Exponent>,
    /// `q`: summation exponents of the data-norm tables.
    pub summations: Vec<Exponent>,
    /// `levels`: frequency levels `N`.
    pub levels: Vec<u32>,
    /// `delta`: data amplitude.
    pub amplitude: f64,
    /// `eta`: time factor, `T_N = eta 2^{-2N}`.
    pub time_factor: f64,
    /// `mu`, `lambda`, `kappa`.
    pub params: PhysParams,
    /// `order`: truncation order `K` of the expansion.
    pub order: usize,
    /// `scale`: box scale `L` (multiple of 12).
    pub scale: u32,
    /// `longitudinal_modes`: grid size along the carrier axis; 0 picks the
    /// smallest alias-free power of two per level.
    pub longitudinal_modes: usize,
    /// `transverse_modes`: grid size along the other axes; 0 picks as above.
    pub transverse_modes: usize,
    /// `intervals`: Duhamel quadrature intervals on `[0, T_N]`.
    pub intervals: usize,
    /// `compressible`, `incompressible`: which models the theorem runs use.
    pub compressible: bool,
    pub incompressible: bool,
    /// `oracle`: cross-check against direct integration.
    pub oracle: bool,
    /// `oracle_level`, `oracle_delta`, `oracle_steps`, `oracle_intervals`,
    /// `convergence_steps`: oracle run controls.
    pub oracle_level: u32,
    pub oracle_amplitude: f64,
    pub oracle_steps: usize,
    pub oracle_intervals: usize,
    pub convergence_steps: usize,
    /// `seed`: seed of the randomized property corpora.
    pub seed: u64,
    /// `out`: output directory.
    pub out: PathBuf,
    /// `large`: permit `dim = 3` or levels above 4.
    pub large: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            dim: 2,
            exponents: vec![Exponent::TWO, Exponent::INFINITY],
            summations: vec![Exponent::ONE, Exponent::INFINITY],
            levels: vec![2, 3, 4],
            amplitude: 0.1,
            time_factor: 0.1,
            params: PhysParams::default(),
            order: 4,
            scale: 24,
            longitudinal_modes: 0,
            transverse_modes: 0,
            intervals: 16,
            compressible: true,
            incompressible: true,
            oracle: true,
            oracle_level: 2,
            oracle_amplitude: 0.05,
            oracle_steps: 16,
            oracle_intervals: 64,
            convergence_steps: 2,
            seed: 1,
            out: PathBuf::from("results"),
            large: false,
        }
    }
}

fn parse_number<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Config(format!("{key}: cannot parse {value:?}")))
}

fn parse_exponent(key: &str, value: &str) -> Result<Exponent> {
    match value {
        "inf" | "infinity" => Ok(Exponent::INFINITY),
        _ => Exponent::new(parse_number(key, value)?)
            .map_err(|e| Error::Config(format!("{key}: {e}"))),
    }
}

fn parse_list<T>(key: &str, value: &str, item: impl Fn(&str, &str) -> Result<T>) -> Result<Vec<T>> {
    let items: Vec<T> = value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| item(key, s))
        .collect::<Result<_>>()?;
    if items.is_empty() {
        return Err(Error::Config(format!("{key}: empty list")));
    }
    Ok(items)
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value {
        "true" | "yes" | "on" | "1" => Ok(true),
        "false" | "no" | "off" | "0" => Ok(false),
        _ => Err(Error::Config(format!("{key}: expected true or false, got {value:?}"))),
    }
}

impl ExperimentConfig {
    /// Defaults overridden by the `key = value` lines of `text`. Blank
    /// lines and `#` comments are ignored; unknown keys are rejected.
    pub fn parse(text: &str) -> Result<Self> {
        let mut c = Self::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", lineno + 1)))?;
            let (key, value) = (key.trim(), value.trim());
            match key {
                "dim" => c.dim = parse_number(key, value)?,
                "p" => c.exponents = parse_list(key, value, parse_exponent)?,
                "q" => c.summations = parse_list(key, value, parse_exponent)?,
                "levels" => c.levels = parse_list(key, value, parse_number)?,
                "delta" => c.amplitude = parse_number(key, value)?,
                "eta" => c.time_factor = parse_number(key, value)?,
                "mu" => c.params.viscosity = parse_number(key, value)?,
                "lambda" => c.params.second_viscosity = parse_number(key, value)?,
                "kappa" => c.params.conductivity = parse_number(key, value)?,
                "order" => c.order = parse_number(key, value)?,
                "scale" => c.scale = parse_number(key, value)?,
                "longitudinal_modes" => c.longitudinal_modes = parse_number(key, value)?,
                "transverse_modes" => c.transverse_modes = parse_number(key, value)?,
                "intervals" => c.intervals = parse_number(key, value)?,
                "compressible" => c.compressible = parse_bool(key, value)?,
                "incompressible" => c.incompressible = parse_bool(key, value)?,
                "oracle" => c.oracle = parse_bool(key, value)?,
                "oracle_level" => c.oracle_level = parse_number(key, value)?,
                "oracle_delta" => c.oracle_amplitude = parse_number(key, value)?,
                "oracle_steps" => c.oracle_steps = parse_number(key, value)?,
                "oracle_intervals" => c.oracle_intervals = parse_number(key, value)?,
                "convergence_steps" => c.convergence_steps = parse_number(key, value)?,
                "seed" => c.seed = parse_number(key, value)?,
                "out" => c.out = PathBuf::from(value),
                "large" => c.large = parse_bool(key, value)?,
                _ => return Err(Error::Config(format!("unknown key {key:?}"))),
            }
        }
        c.validate()?;
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Checks every precondition the runs rely on before any compute.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if !(2..=3).contains(&self.dim) {
            return bad(format!("dim = {} (supported: 2, 3)", self.dim));
        }
        if !self.large && (self.dim == 3 || self.levels.iter().any(|&n| n > 4)) {
            return bad(format!(
                "dim = 3 or levels above 4 need large = true (estimated peak memory {:.1} GiB)",
                self.memory_estimate_gib()
            ));
        }
        if self.levels.is_empty() {
            return bad("levels: empty list".into());
        }
        if self.levels.windows(2).any(|w| w[1] <= w[0]) {
            return bad("levels must be strictly increasing".into());
        }
        if !(self.amplitude > 0.0 && self.amplitude.is_finite()) {
            return bad(format!("delta = {} must be positive", self.amplitude));
        }
        if !(self.time_factor > 0.0 && self.time_factor <= 1.0) {
            return bad(format!("eta = {} must lie in (0, 1]", self.time_factor));
        }
        if !(self.oracle_amplitude > 0.0 && self.oracle_amplitude.is_finite()) {
            return bad(format!("oracle_delta = {} must be positive", self.oracle_amplitude));
        }
        self.params
            .validate()
            .map_err(|e| Error::Config(e.to_string()))?;
        if self.order < 1 {
            return bad("order must be at least 1".into());
        }
        if self.intervals < 2 || self.oracle_intervals < 2 {
            return bad("quadrature needs at least 2 intervals".into());
        }
        if self.oracle_steps == 0 || self.convergence_steps == 0 {
            return bad("oracle step counts must be positive".into());
        }
        let profile = BumpProfile::default();
        if self.scale % 12 != 0 || self.scale < profile.minimal_scale() {
            return bad(format!(
                "scale = {} must be a multiple of 12 and at least {}",
                self.scale,
                profile.minimal_scale()
            ));
        }
        let mut levels = self.levels.clone();
        if self.oracle && !levels.contains(&self.oracle_level) {
            levels.push(self.oracle_level);
        }
        for &n in &levels {
            let data = DataParams::new(n, self.amplitude, Exponent::TWO, self.dim)
                .map_err(|e| Error::Config(format!("N = {n}: {e}")))?;
            data.check_containment(&profile)
                .map_err(|e| Error::Config(format!("N = {n}: {e}")))?;
            self.grid_for(n, self.order)
                .map_err(|e| Error::Config(format!("N = {n}: {e}")))?;
        }
        if self.oracle {
            self.oracle_grid_for(self.oracle_level, self.order)
                .map_err(|e| Error::Config(format!("oracle level {}: {e}", self.oracle_level)))?;
        }
        Ok(())
    }

    /// Largest populated wavenumber of the data at level `n`, per axis: the
    /// bump vanishes on the boundary of its support.
    pub fn data_extent(&self, n: u32) -> Vec<usize> {
        let profile = BumpProfile::default();
        let l = self.scale as f64;
        let carrier = 17.0 * 2f64.powi(n as i32) / 12.0;
        let strict = |x: f64| (x * l).ceil() as usize - 1;
        let mut ext = vec![strict(profile.r_outer()); self.dim];
        ext[0] = strict(carrier + profile.r_outer());
        ext
    }

    /// Grid whose products up to order `order` are alias free at level `n`,
    /// honouring explicit mode overrides.
    pub fn grid_for(&self, n: u32, order: usize) -> Result<GridSpec> {
        let need: Vec<usize> = self.data_extent(n).iter().map(|e| 2 * order * e + 1).collect();
        self.sized_grid(order, need)
    }

    /// Like [`Self::grid_for`], but also keeping four harmonics of the data
    /// inside the dealiasing cutoff, as the direct integrator needs.
    pub fn oracle_grid_for(&self, n: u32, order: usize) -> Result<GridSpec> {
        let need: Vec<usize> = self
            .data_extent(n)
            .iter()
            .map(|e| (2 * order * e + 1).max(12 * e + 1))
            .collect();
        self.sized_grid(order, need)
    }

    fn sized_grid(&self, order: usize, need: Vec<usize>) -> Result<GridSpec> {
        let pick = |override_modes: usize, need: usize| -> usize {
            if override_modes > 0 {
                override_modes
            } else {
                need.next_power_of_two().max(32)
            }
        };
        let mut modes = vec![pick(self.longitudinal_modes, need[0])];
        for &x in &need[1..] {
            modes.push(pick(self.transverse_modes, x));
        }
        if modes.iter().zip(&need).any(|(m, r)| m < r) {
            return Err(Error::FrequencyOverflow {
                order,
                required: need,
                cutoff: modes,
            });
        }
        GridSpec::anisotropic(self.scale, modes)
    }

    /// Rough peak memory of the largest expansion run, in GiB.
    pub fn memory_estimate_gib(&self) -> f64 {
        let Some(&top) = self.levels.iter().max() else {
            return 0.0;
        };
        let Ok(grid) = self.grid_for(top, self.order) else {
            return f64::NAN;
        };
        let d = self.dim as f64;
        let points = grid.len() as f64;
        // Point-value caches of the lower orders plus stored band spectra.
        let cache = (self.order.saturating_sub(1)) as f64 * (2.0 * d + d * d + 5.0) * points * 8.0;
        let ext = self.data_extent(top);
        let band: f64 = (1..=self.order)
            .map(|k| ext.iter().map(|&e| (2 * k * e + 1) as f64).product::<f64>())
            .sum();
        let stored = 2.0 * (d + 2.0) * band * 16.0 * (self.intervals + 1) as f64;
        (cache + stored + 8.0 * points * 16.0) / (1u64 << 30) as f64
    }

    pub fn horizon(&self, n: u32) -> f64 {
        self.time_factor * (-2.0 * n as f64).exp2()
    }

    pub fn data_params(&self, n: u32, p: Exponent, amplitude: f64) -> Result<DataParams> {
        DataParams::new(n, amplitude, p, self.dim)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate_and_parse_round_trip() {
        let c = ExperimentConfig::parse("").unwrap();
        assert_eq!(c, ExperimentConfig::default());
        let c = ExperimentConfig::parse("# comment\nlevels = 2, 3\np = inf\ndelta = 0.2\noracle = false\n").unwrap();
        assert_eq!(c.levels, vec![2, 3]);
        assert_eq!(c.exponents, vec![Exponent::INFINITY]);
        assert_eq!(c.amplitude, 0.2);
        assert!(!c.oracle);
    }

    #[test]
    fn violations_are_named() {
        let cases = [
            ("bogus = 1", "unknown key"),
            ("levels = 1", "containment"),
            ("scale = 30", "multiple of 12"),
            ("levels = 3, 2", "increasing"),
            ("dim = 3", "large = true"),
            ("levels = 2, 5", "large = true"),
            ("mu = -1", "mu"),
            ("longitudinal_modes = 512", "alias-free"),
            ("delta = x", "cannot parse"),
            ("eta = 2", "eta"),
        ];
        for (text, needle) in cases {
            let err = ExperimentConfig::parse(text).unwrap_err().to_string();
            assert!(err.contains(needle), "{text}: {err}");
        }
    }

    #[test]
    fn automatic_grids_are_alias_free() {
        let c = ExperimentConfig::default();
        assert_eq!(c.data_extent(2), vec![139, 3]);
        assert_eq!(c.grid_for(2, 4).unwrap().modes(), &[2048, 32]);
        assert_eq!(c.oracle_grid_for(2, 2).unwrap().modes(), &[2048, 64]);
        assert_eq!(c.grid_for(4, 4).unwrap().modes(), &[8192, 32]);
        assert!(c.memory_estimate_gib() < 2.0);
    }
}
