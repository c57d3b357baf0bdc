//! JSON configuration files.
//!
//! Keys: `version` (=1), `dims`, `spacing`, `flux` (4x4 integers), `a`
//! (4 per site), `phi_re`/`phi_im` (2 per site), `s` (1 per site), `seed`
//! (integer or null). Arrays are site-major with the first lattice
//! coordinate varying fastest. Reals are written with 17 significant digits.

use std::fmt::Write as _;
use std::path::Path;

use num_complex::Complex64;
use serde::Deserialize;

use super::{Configuration, FluxMatrix, GaugeField, PlusField};
use crate::clifford::Spinor;
use crate::error::{Error, Result};
use crate::lattice::{Lattice, OneForm, ScalarField};

pub const FORMAT_VERSION: i64 = 1;

#[derive(Deserialize)]
struct RawConfiguration {
    version: i64,
    dims: Vec<usize>,
    spacing: f64,
    flux: Vec<Vec<f64>>,
    a: Vec<f64>,
    phi_re: Vec<f64>,
    phi_im: Vec<f64>,
    s: Vec<f64>,
    seed: Option<u64>,
}

fn push_real(out: &mut String, v: f64) -> Result<()> {
    if !v.is_finite() {
        return Err(Error::NonFinite("configuration file"));
    }
    write!(out, "{v:.16e}").expect("writing to a String");
    Ok(())
}

fn push_array(out: &mut String, key: &str, values: impl Iterator<Item = f64>) -> Result<()> {
    write!(out, "  \"{key}\": [").expect("writing to a String");
    for (i, v) in values.enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        push_real(out, v)?;
    }
    out.push_str("],\n");
    Ok(())
}

/// Serialize to the configuration file format.
pub fn to_json_string(cfg: &Configuration) -> Result<String> {
    cfg.validate()?;
    let lat = &cfg.lattice;
    let mut out = String::from("{\n");
    writeln!(out, "  \"version\": {FORMAT_VERSION},").unwrap();
    let d = lat.dims();
    writeln!(out, "  \"dims\": [{}, {}, {}, {}],", d[0], d[1], d[2], d[3]).unwrap();
    out.push_str("  \"spacing\": ");
    push_real(&mut out, lat.spacing())?;
    out.push_str(",\n");
    let rows: Vec<String> = cfg
        .gauge
        .flux
        .0
        .iter()
        .map(|r| format!("[{}, {}, {}, {}]", r[0], r[1], r[2], r[3]))
        .collect();
    writeln!(out, "  \"flux\": [{}],", rows.join(", ")).unwrap();
    push_array(&mut out, "a", cfg.gauge.a.0.iter().copied())?;
    push_array(
        &mut out,
        "phi_re",
        cfg.spinor.data.iter().flat_map(|s| [s[0].re, s[1].re]),
    )?;
    push_array(
        &mut out,
        "phi_im",
        cfg.spinor.data.iter().flat_map(|s| [s[0].im, s[1].im]),
    )?;
    push_array(&mut out, "s", cfg.scalar_curvature.0.iter().copied())?;
    match cfg.seed {
        Some(seed) => writeln!(out, "  \"seed\": {seed}").unwrap(),
        None => out.push_str("  \"seed\": null\n"),
    }
    out.push_str("}\n");
    Ok(out)
}

pub fn from_json_str(text: &str) -> Result<Configuration> {
    let raw: RawConfiguration =
        serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))?;
    if raw.version != FORMAT_VERSION {
        return Err(Error::Version(raw.version));
    }
    let dims: [usize; 4] = raw
        .dims
        .as_slice()
        .try_into()
        .map_err(|_| Error::Format(format!("dims must have 4 entries, got {}", raw.dims.len())))?;
    let lattice = Lattice::new(dims, raw.spacing)?;

    if raw.flux.len() != 4 || raw.flux.iter().any(|r| r.len() != 4) {
        return Err(Error::Format("flux must be a 4x4 array".into()));
    }
    let flux_reals: [[f64; 4]; 4] = std::array::from_fn(|i| std::array::from_fn(|j| raw.flux[i][j]));
    let flux = FluxMatrix::from_reals(&flux_reals)?;

    let a = OneForm(raw.a);
    a.check(&lattice)?;
    let s = ScalarField(raw.s);
    s.check(&lattice)?;
    if raw.phi_re.len() != 2 * lattice.sites() || raw.phi_im.len() != 2 * lattice.sites() {
        return Err(Error::SizeMismatch {
            what: "spinor components",
            expected: 2 * lattice.sites(),
            got: raw.phi_re.len().min(raw.phi_im.len()),
        });
    }
    let spinor = PlusField::from_fn(&lattice, |x| {
        Spinor::new(
            Complex64::new(raw.phi_re[2 * x], raw.phi_im[2 * x]),
            Complex64::new(raw.phi_re[2 * x + 1], raw.phi_im[2 * x + 1]),
        )
    });
    let mut cfg = Configuration::new(lattice, GaugeField { a, flux }, spinor, s)?;
    cfg.seed = raw.seed;
    Ok(cfg)
}

pub fn save(cfg: &Configuration, path: impl AsRef<Path>) -> Result<()> {
    let text = to_json_string(cfg)?;
    std::fs::write(path, text)?;
    Ok(())
}

pub fn load(path: impl AsRef<Path>) -> Result<Configuration> {
    let text = std::fs::read_to_string(path)?;
    from_json_str(&text)
}
