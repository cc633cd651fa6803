//! Run configuration: sectioned `key = value` text with a fixed schema.
//!
//! Every key has a default. Values are parsed, canonicalized and checked
//! before any computation starts; the canonical form feeds the content hash,
//! so two files that resolve to the same values hash identically.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use num_complex::Complex64;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::laser::{BeamConfig, BeamModel};
use crate::radiation::Window;
use crate::units::Direction;
use crate::vec3::Vec3;

#[derive(Debug, Clone, Copy)]
enum Kind {
    Float,
    /// Empty or a float.
    OptFloat,
    Count,
    Choice(&'static [&'static str]),
    Vec3,
    Pair,
    /// `theta phi; theta phi; ...` in radians.
    Directions,
    /// `re im dpx dpy dpz; ...`.
    Components,
    Text,
}

struct KeySpec {
    section: &'static str,
    key: &'static str,
    kind: Kind,
    default: &'static str,
}

const fn k(section: &'static str, key: &'static str, kind: Kind, default: &'static str) -> KeySpec {
    KeySpec { section, key, kind, default }
}

const MODELS: &[&str] = &["plane_infinite", "plane_pulsed", "focused_pulsed"];

const SCHEMA: &[KeySpec] = &[
    k("beam", "model", Kind::Choice(MODELS), "focused_pulsed"),
    k("beam", "wavelength_nm", Kind::Float, "800"),
    k("beam", "peak_intensity_W_cm2", Kind::Float, "1e19"),
    k("beam", "fwhm_fs", Kind::Float, "35"),
    k("beam", "waist_over_lambda", Kind::Float, "3"),
    k("beam", "carrier_phase", Kind::Float, "0"),
    k("electron", "birth_mode", Kind::Choice(&["threshold", "explicit_time"]), "threshold"),
    k("electron", "birth_threshold_W_cm2", Kind::Float, "2e16"),
    k("electron", "birth_time_fs", Kind::Float, "0"),
    k("electron", "birth_position_um", Kind::Vec3, "0,0,0"),
    k("electron", "initial_momentum_mec", Kind::Vec3, "0,0,0"),
    k("electron", "dt_over_period", Kind::Float, "0.001"),
    k("electron", "margin_periods", Kind::Float, "10"),
    k("electron", "duration_periods", Kind::Float, "100"),
    k("grids", "n_theta", Kind::Count, "64"),
    k("grids", "n_phi", Kind::Count, "64"),
    k("grids", "n_omega", Kind::Count, "512"),
    k("grids", "omega_min", Kind::Float, "0.05"),
    k("grids", "omega_max", Kind::Float, "10"),
    k("grids", "directions", Kind::Directions, ""),
    k("grids", "samples_per_period", Kind::Float, "100"),
    k("grids", "window", Kind::Choice(&["tails", "hann"]), "tails"),
    k("grids", "band_nm", Kind::Pair, "850,950"),
    k("grids", "collection_efficiency", Kind::Float, "0.1"),
    k("grids", "r0_over_lambda_max", Kind::Float, "2"),
    k("grids", "n_r0", Kind::Count, "201"),
    k("wavepacket", "sigma_nm", Kind::OptFloat, ""),
    k("wavepacket", "sigma_angstrom", Kind::OptFloat, ""),
    k("wavepacket", "center_position_nm", Kind::Vec3, "0,0,0"),
    k("wavepacket", "center_momentum_mec", Kind::Vec3, "0,0,0"),
    k("wavepacket", "components", Kind::Components, ""),
    k("wavepacket", "evolve_time_fs", Kind::Float, "0"),
    k("wavepacket", "slice_axis", Kind::Choice(&["x", "y", "z"]), "z"),
    k("wavepacket", "slice_points", Kind::Count, "101"),
    k("wavepacket", "box_widths", Kind::Float, "6"),
    k("wavepacket", "negativity_resolution", Kind::Count, "16"),
    k("ensemble", "n_samples", Kind::Count, "4096"),
    k("ensemble", "seed", Kind::Count, "1"),
    k("ensemble", "model", Kind::Choice(&["incoherent", "coherent", "both"]), "both"),
    k("ensemble", "batches", Kind::Count, "32"),
    k("output", "dir", Kind::Text, "out"),
    k("output", "trajectory_stride", Kind::Count, "10"),
];

fn schema_entry(path: &str) -> Option<&'static KeySpec> {
    SCHEMA.iter().find(|s| format!("{}.{}", s.section, s.key) == path)
}

fn bad(path: &str, msg: impl std::fmt::Display) -> Error {
    Error::Config(format!("{path}: {msg}"))
}

/// Key paths (`section.key`) to raw values, as written.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RawConfig {
    entries: BTreeMap<String, String>,
}

impl RawConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        let mut section: Option<String> = None;
        for (lineno, raw) in text.lines().enumerate() {
            let line = strip_comment(raw).trim();
            if line.is_empty() {
                continue;
            }
            let at = || format!("line {}", lineno + 1);
            if let Some(name) = line.strip_prefix('[') {
                let name = name
                    .strip_suffix(']')
                    .ok_or_else(|| Error::Config(format!("{}: unterminated section header", at())))?;
                let name = name.trim();
                if !SCHEMA.iter().any(|s| s.section == name) {
                    return Err(Error::Config(format!("{}: unknown section [{name}]", at())));
                }
                section = Some(name.to_string());
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("{}: expected key = value", at())))?;
            let sec = section
                .as_ref()
                .ok_or_else(|| Error::Config(format!("{}: key outside any section", at())))?;
            let path = format!("{sec}.{}", key.trim());
            if schema_entry(&path).is_none() {
                return Err(bad(&path, "unknown key"));
            }
            if entries.insert(path.clone(), value.trim().to_string()).is_some() {
                return Err(bad(&path, "given twice"));
            }
        }
        Ok(RawConfig { entries })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Applies `section.key=value`, replacing any value from the file.
    pub fn set(&mut self, assignment: &str) -> Result<()> {
        let (path, value) = assignment
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("override `{assignment}` is not section.key=value")))?;
        let path = path.trim();
        if schema_entry(path).is_none() {
            return Err(bad(path, "unknown key"));
        }
        self.entries.insert(path.to_string(), value.trim().to_string());
        Ok(())
    }

    pub fn get(&self, path: &str) -> Option<&str> {
        self.entries.get(path).map(String::as_str)
    }
}

fn strip_comment(line: &str) -> &str {
    let t = line.trim_start();
    if t.starts_with('#') || t.starts_with(';') {
        return "";
    }
    match line.find(" #") {
        Some(i) => &line[..i],
        None => line,
    }
}

fn float(path: &str, s: &str) -> Result<f64> {
    let v: f64 = s.trim().parse().map_err(|_| bad(path, format!("`{s}` is not a number")))?;
    if !v.is_finite() {
        return Err(bad(path, "must be finite"));
    }
    Ok(v)
}

fn floats(path: &str, s: &str, n: usize) -> Result<Vec<f64>> {
    let parts: Vec<&str> = s.split(|c: char| c == ',' || c.is_whitespace()).filter(|p| !p.is_empty()).collect();
    if parts.len() != n {
        return Err(bad(path, format!("expected {n} numbers, got `{s}`")));
    }
    parts.iter().map(|p| float(path, p)).collect()
}

fn join(v: &[f64], sep: &str) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(sep)
}

fn groups<'a>(s: &'a str) -> impl Iterator<Item = &'a str> {
    s.split(';').map(str::trim).filter(|g| !g.is_empty())
}

fn canonical(entry: &KeySpec, path: &str, value: &str) -> Result<String> {
    let v = value.trim();
    Ok(match entry.kind {
        Kind::Float => float(path, v)?.to_string(),
        Kind::OptFloat if v.is_empty() => String::new(),
        Kind::OptFloat => float(path, v)?.to_string(),
        Kind::Count => v.parse::<u64>().map_err(|_| bad(path, format!("`{v}` is not a non-negative integer")))?.to_string(),
        Kind::Choice(options) => {
            if !options.contains(&v) {
                return Err(bad(path, format!("`{v}` is not one of {}", options.join(", "))));
            }
            v.to_string()
        }
        Kind::Vec3 => join(&floats(path, v, 3)?, ","),
        Kind::Pair => join(&floats(path, v, 2)?, ","),
        Kind::Directions => groups(v).map(|g| floats(path, g, 2).map(|x| join(&x, " "))).collect::<Result<Vec<_>>>()?.join("; "),
        Kind::Components => groups(v).map(|g| floats(path, g, 5).map(|x| join(&x, " "))).collect::<Result<Vec<_>>>()?.join("; "),
        Kind::Text => v.to_string(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BirthMode {
    /// Born when the cycle-averaged intensity first reaches this value (W/cm²).
    Threshold(f64),
    /// Born at this time (fs) relative to the pulse peak at the origin.
    ExplicitTime(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ElectronConfig {
    pub birth: BirthMode,
    pub birth_position_um: Vec3,
    pub initial_momentum: Vec3,
    pub dt_over_period: f64,
    pub margin_periods: f64,
    /// Integration length for an infinite plane wave.
    pub duration_periods: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridConfig {
    pub n_theta: usize,
    pub n_phi: usize,
    pub n_omega: usize,
    pub omega_min: f64,
    pub omega_max: f64,
    /// Explicit directions; empty for the full sphere.
    pub directions: Vec<Direction>,
    pub samples_per_period: f64,
    pub window: Window,
    pub band_nm: (f64, f64),
    pub collection_efficiency: f64,
    pub r0_over_lambda_max: f64,
    pub n_r0: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WavepacketConfig {
    pub sigma_m: f64,
    pub center_position_m: Vec3,
    pub center_momentum: Vec3,
    /// Amplitude and momentum offset (mₑc) per component; empty for a single
    /// Gaussian.
    pub components: Vec<(Complex64, Vec3)>,
    pub evolve_time_fs: f64,
    pub slice_axis: usize,
    pub slice_points: usize,
    pub box_widths: f64,
    pub negativity_resolution: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EnsembleModel {
    Incoherent,
    Coherent,
    Both,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleConfig {
    pub n_samples: usize,
    pub seed: u64,
    pub model: EnsembleModel,
    pub batches: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputConfig {
    pub dir: String,
    pub trajectory_stride: usize,
}

/// A fully resolved and validated run configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub beam: BeamConfig,
    pub electron: ElectronConfig,
    pub grids: GridConfig,
    pub wavepacket: WavepacketConfig,
    pub ensemble: EnsembleConfig,
    pub output: OutputConfig,
    resolved: BTreeMap<String, String>,
}

impl RunConfig {
    pub fn from_raw(raw: &RawConfig) -> Result<Self> {
        let mut resolved = BTreeMap::new();
        for s in SCHEMA {
            let path = format!("{}.{}", s.section, s.key);
            let value = raw.get(&path).unwrap_or(s.default);
            resolved.insert(path.clone(), canonical(s, &path, value)?);
        }
        let r = |p: &str| resolved[p].as_str();
        let f = |p: &str| float(p, r(p));
        let n = |p: &str| r(p).parse::<usize>().map_err(|_| bad(p, "out of range"));
        let v3 = |p: &str| floats(p, r(p), 3).map(|v| Vec3::new(v[0], v[1], v[2]));

        let beam = BeamConfig {
            model: BeamModel::parse(r("beam.model")).expect("choice checked"),
            wavelength_nm: f("beam.wavelength_nm")?,
            peak_intensity_w_cm2: f("beam.peak_intensity_W_cm2")?,
            fwhm_fs: f("beam.fwhm_fs")?,
            waist_over_lambda: f("beam.waist_over_lambda")?,
            carrier_phase: f("beam.carrier_phase")?,
        };
        beam.validate()?;

        let birth = match r("electron.birth_mode") {
            "threshold" => {
                let t = f("electron.birth_threshold_W_cm2")?;
                if !(t > 0.0) {
                    return Err(bad("electron.birth_threshold_W_cm2", "must be positive"));
                }
                BirthMode::Threshold(t)
            }
            _ => BirthMode::ExplicitTime(f("electron.birth_time_fs")?),
        };
        let electron = ElectronConfig {
            birth,
            birth_position_um: v3("electron.birth_position_um")?,
            initial_momentum: v3("electron.initial_momentum_mec")?,
            dt_over_period: f("electron.dt_over_period")?,
            margin_periods: f("electron.margin_periods")?,
            duration_periods: f("electron.duration_periods")?,
        };
        if !(electron.dt_over_period > 0.0 && electron.dt_over_period <= 1.0 / 200.0) {
            return Err(bad("electron.dt_over_period", "must lie in (0, 1/200]"));
        }
        if electron.margin_periods < 0.0 {
            return Err(bad("electron.margin_periods", "must be non-negative"));
        }
        if !(electron.duration_periods > 0.0) {
            return Err(bad("electron.duration_periods", "must be positive"));
        }

        let directions = groups(r("grids.directions"))
            .map(|g| {
                let v = floats("grids.directions", g, 2)?;
                Direction::new(v[0], v[1]).map_err(|e| bad("grids.directions", e))
            })
            .collect::<Result<Vec<_>>>()?;
        let band = floats("grids.band_nm", r("grids.band_nm"), 2)?;
        let grids = GridConfig {
            n_theta: n("grids.n_theta")?,
            n_phi: n("grids.n_phi")?,
            n_omega: n("grids.n_omega")?,
            omega_min: f("grids.omega_min")?,
            omega_max: f("grids.omega_max")?,
            directions,
            samples_per_period: f("grids.samples_per_period")?,
            window: if r("grids.window") == "hann" { Window::Hann } else { Window::None },
            band_nm: (band[0], band[1]),
            collection_efficiency: f("grids.collection_efficiency")?,
            r0_over_lambda_max: f("grids.r0_over_lambda_max")?,
            n_r0: n("grids.n_r0")?,
        };
        if grids.n_theta < 2 || grids.n_phi < 1 {
            return Err(bad("grids.n_theta", "sphere needs n_theta >= 2 and n_phi >= 1"));
        }
        if grids.n_omega < 2 {
            return Err(bad("grids.n_omega", "must be at least 2"));
        }
        if !(grids.omega_min > 0.0 && grids.omega_max > grids.omega_min) {
            return Err(bad("grids.omega_max", "need 0 < omega_min < omega_max"));
        }
        if !(grids.samples_per_period >= 4.0) {
            return Err(bad("grids.samples_per_period", "must be at least 4"));
        }
        if !(grids.band_nm.0 > 0.0 && grids.band_nm.1 > grids.band_nm.0) {
            return Err(bad("grids.band_nm", "need 0 < lower < upper"));
        }
        if !(0.0..=1.0).contains(&grids.collection_efficiency) {
            return Err(bad("grids.collection_efficiency", "must lie in [0, 1]"));
        }
        if !(grids.r0_over_lambda_max > 0.0) || grids.n_r0 < 2 {
            return Err(bad("grids.n_r0", "scan needs r0_over_lambda_max > 0 and n_r0 >= 2"));
        }

        let sigma_m = match (r("wavepacket.sigma_nm"), r("wavepacket.sigma_angstrom")) {
            ("", "") => 1e-10,
            (_, "") => f("wavepacket.sigma_nm")? * 1e-9,
            ("", _) => f("wavepacket.sigma_angstrom")? * 1e-10,
            _ => return Err(bad("wavepacket.sigma_angstrom", "give sigma_nm or sigma_angstrom, not both")),
        };
        if !(sigma_m > 0.0) {
            return Err(bad("wavepacket.sigma_nm", "width must be positive"));
        }
        let components = groups(r("wavepacket.components"))
            .map(|g| {
                let v = floats("wavepacket.components", g, 5)?;
                Ok((Complex64::new(v[0], v[1]), Vec3::new(v[2], v[3], v[4])))
            })
            .collect::<Result<Vec<_>>>()?;
        if components.len() == 1 {
            return Err(bad("wavepacket.components", "a superposition needs at least two components"));
        }
        let wavepacket = WavepacketConfig {
            sigma_m,
            center_position_m: v3("wavepacket.center_position_nm")? * 1e-9,
            center_momentum: v3("wavepacket.center_momentum_mec")?,
            components,
            evolve_time_fs: f("wavepacket.evolve_time_fs")?,
            slice_axis: match r("wavepacket.slice_axis") {
                "x" => 0,
                "y" => 1,
                _ => 2,
            },
            slice_points: n("wavepacket.slice_points")?,
            box_widths: f("wavepacket.box_widths")?,
            negativity_resolution: n("wavepacket.negativity_resolution")?,
        };
        if wavepacket.evolve_time_fs < 0.0 {
            return Err(bad("wavepacket.evolve_time_fs", "must be non-negative"));
        }
        if wavepacket.slice_points < 2 {
            return Err(bad("wavepacket.slice_points", "must be at least 2"));
        }
        if !(wavepacket.box_widths > 0.0) {
            return Err(bad("wavepacket.box_widths", "must be positive"));
        }
        if wavepacket.negativity_resolution < 2 {
            return Err(bad("wavepacket.negativity_resolution", "must be at least 2"));
        }

        let ensemble = EnsembleConfig {
            n_samples: n("ensemble.n_samples")?,
            seed: r("ensemble.seed").parse().map_err(|_| bad("ensemble.seed", "out of range"))?,
            model: match r("ensemble.model") {
                "incoherent" => EnsembleModel::Incoherent,
                "coherent" => EnsembleModel::Coherent,
                _ => EnsembleModel::Both,
            },
            batches: n("ensemble.batches")?,
        };
        if ensemble.n_samples == 0 {
            return Err(bad("ensemble.n_samples", "must be at least 1"));
        }
        if ensemble.batches == 0 {
            return Err(bad("ensemble.batches", "must be at least 1"));
        }

        let output = OutputConfig { dir: r("output.dir").to_string(), trajectory_stride: n("output.trajectory_stride")? };
        if output.trajectory_stride == 0 {
            return Err(bad("output.trajectory_stride", "must be at least 1"));
        }
        Ok(RunConfig { beam, electron, grids, wavepacket, ensemble, output, resolved })
    }

    pub fn parse(text: &str) -> Result<Self> {
        Self::from_raw(&RawConfig::parse(text)?)
    }

    /// Canonical values of every key, defaults included.
    pub fn resolved(&self) -> &BTreeMap<String, String> {
        &self.resolved
    }

    /// The resolved configuration as config-file text.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let mut current = "";
        for s in SCHEMA {
            if s.section != current {
                if !current.is_empty() {
                    out.push('\n');
                }
                let _ = writeln!(out, "[{}]", s.section);
                current = s.section;
            }
            let _ = writeln!(out, "{} = {}", s.key, self.resolved[&format!("{}.{}", s.section, s.key)]);
        }
        out
    }

    /// SHA-256 of the canonical resolved values (hex). Output location is
    /// excluded so relocating a run does not change its identity.
    pub fn hash(&self) -> String {
        let mut h = Sha256::new();
        for (k, v) in &self.resolved {
            if k == "output.dir" {
                continue;
            }
            h.update(k.as_bytes());
            h.update(b"=");
            h.update(v.as_bytes());
            h.update(b"\n");
        }
        h.finalize().iter().map(|b| format!("{b:02x}")).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_resolve() {
        let c = RunConfig::parse("").unwrap();
        assert_eq!(c.beam.model, BeamModel::FocusedPulsed);
        assert_eq!(c.grids.n_omega, 512);
        assert_eq!(c.wavepacket.sigma_m, 1e-10);
        assert_eq!(c.electron.birth, BirthMode::Threshold(2e16));
        assert_eq!(RunConfig::parse(&c.to_text()).unwrap(), c);
    }

    #[test]
    fn unknown_key_is_named() {
        let err = RunConfig::parse("[beam]\nwavelenght_nm = 800\n").unwrap_err();
        assert!(err.to_string().contains("beam.wavelenght_nm"), "{err}");
        let err = RawConfig::default().set("grids.nope=1").unwrap_err();
        assert!(err.to_string().contains("grids.nope"));
        assert!(RunConfig::parse("[bem]\n").is_err());
        assert!(RunConfig::parse("model = x\n").is_err());
    }

    #[test]
    fn bad_values_name_the_key() {
        for (text, key) in [
            ("[beam]\nwavelength_nm = abc", "beam.wavelength_nm"),
            ("[beam]\nmodel = gaussian", "beam.model"),
            ("[grids]\ndirections = 1.0", "grids.directions"),
            ("[electron]\ndt_over_period = 0.01", "electron.dt_over_period"),
            ("[wavepacket]\nsigma_nm = 1\nsigma_angstrom = 1", "wavepacket.sigma_angstrom"),
            ("[ensemble]\nn_samples = -3", "ensemble.n_samples"),
        ] {
            let err = RunConfig::parse(text).unwrap_err();
            assert!(err.to_string().contains(key), "{text}: {err}");
        }
    }

    #[test]
    fn hash_tracks_resolved_values() {
        let a = RunConfig::parse("[beam]\npeak_intensity_W_cm2 = 1e19 # comment\n").unwrap();
        let b = RunConfig::parse("[beam]\npeak_intensity_W_cm2 = 1.0E19\n").unwrap();
        let c = RunConfig::parse("[beam]\npeak_intensity_W_cm2 = 1.1e19\n").unwrap();
        let d = RunConfig::parse("[output]\ndir = elsewhere\n").unwrap();
        assert_eq!(a.hash(), b.hash());
        assert_eq!(a.hash(), RunConfig::parse("").unwrap().hash());
        assert_ne!(a.hash(), c.hash());
        assert_eq!(a.hash(), d.hash());
        assert_eq!(a.hash().len(), 64);
    }

    #[test]
    fn overrides_replace_file_values() {
        let mut raw = RawConfig::parse("[ensemble]\nseed = 5\n").unwrap();
        raw.set("ensemble.seed=9").unwrap();
        raw.set("grids.directions = 1.5707963267948966 0; 1.5707963267948966 1.5707963267948966").unwrap();
        let c = RunConfig::from_raw(&raw).unwrap();
        assert_eq!(c.ensemble.seed, 9);
        assert_eq!(c.grids.directions, vec![Direction::FORWARD, Direction::PERPENDICULAR_Y]);
    }

    #[test]
    fn components_parse() {
        let c = RunConfig::parse("[wavepacket]\nsigma_angstrom = 2\ncomponents = 1 0 0 0 -1e-3; 0 1 0 0 1e-3\n").unwrap();
        assert_eq!(c.wavepacket.sigma_m, 2e-10);
        assert_eq!(c.wavepacket.components[1], (Complex64::new(0.0, 1.0), Vec3::new(0.0, 0.0, 1e-3)));
        assert!(RunConfig::parse("[wavepacket]\ncomponents = 1 0 0 0 0\n").is_err());
    }
}
