use std::fmt::Write as _;
use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use super::ExpansionSeries;
use crate::error::{Error, Result};
use crate::field::{write_field, SpectralField};

/// What a checkpoint directory holds.
#[derive(Clone, Debug, PartialEq)]
pub struct CheckpointManifest {
    pub path: PathBuf,
    pub nodes: Vec<usize>,
    pub files: Vec<String>,
}

/// Writes `P_k`, `U_k` and `Theta_k` at the given nodes, one container file
/// per scalar field, plus `manifest.txt` listing the order, grid,
/// parameters, every node time and the files.
pub fn write_checkpoint(series: &ExpansionSeries, dir: &Path, nodes: &[usize]) -> Result<CheckpointManifest> {
    let n_nodes = series.times().len();
    if let Some(&bad) = nodes.iter().find(|&&i| i >= n_nodes) {
        return Err(Error::InvalidParams(format!("node {bad} outside 0..{n_nodes}")));
    }
    fs::create_dir_all(dir)?;
    let mut files = Vec::new();
    let mut save = |name: String, f: &SpectralField| -> Result<()> {
        let out = BufWriter::new(File::create(dir.join(&name))?);
        write_field(out, f)?;
        files.push(name);
        Ok(())
    };
    for &node in nodes {
        for k in 1..=series.order() {
            save(format!("order{k}_node{node}_density.fld"), &series.density(k, node)?)?;
            let u = series.velocity(k, node)?;
            for (a, c) in u.components().iter().enumerate() {
                save(format!("order{k}_node{node}_velocity{a}.fld"), c)?;
            }
            save(format!("order{k}_node{node}_temperature.fld"), &series.temperature(k, node)?)?;
        }
    }

    let grid = series.grid();
    let params = series.params();
    let mut text = String::new();
    let _ = writeln!(text, "order = {}", series.order());
    let _ = writeln!(text, "model = {}", series.model().name());
    let _ = writeln!(text, "scale = {}", grid.scale());
    let modes: Vec<String> = grid.modes().iter().map(|m| m.to_string()).collect();
    let _ = writeln!(text, "modes = {}", modes.join(","));
    let _ = writeln!(text, "mu = {:e}", params.viscosity);
    let _ = writeln!(text, "lambda = {:e}", params.second_viscosity);
    let _ = writeln!(text, "kappa = {:e}", params.conductivity);
    let times: Vec<String> = series.times().iter().map(|t| format!("{t:e}")).collect();
    let _ = writeln!(text, "times = {}", times.join(","));
    let saved: Vec<String> = nodes.iter().map(|n| n.to_string()).collect();
    let _ = writeln!(text, "saved_nodes = {}", saved.join(","));
    for f in &files {
        let _ = writeln!(text, "file = {f}");
    }
    fs::write(dir.join("manifest.txt"), text)?;
    Ok(CheckpointManifest {
        path: dir.to_path_buf(),
        nodes: nodes.to_vec(),
        files,
    })
}
