//! Sweep configuration: a single JSON document.
//!
//! Physical quantities accept several spellings distinguished by suffix:
//! bare names are angular frequencies in rad/s, `_hz` names are ordinary
//! frequencies, `_over_omega_m` names are ratios to the mechanical frequency.

use std::f64::consts::TAU;

use optomech_core::constants::SPEED_OF_LIGHT;
use optomech_core::model::PressureSign;
use optomech_core::{BranchPolicy, Coulomb, Drive, PhysicalParams};
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("config error at `{path}`: {reason}")]
pub struct ConfigError {
    pub path: String,
    pub reason: String,
}

impl ConfigError {
    fn new(path: impl Into<String>, reason: impl Into<String>) -> Self {
        ConfigError {
            path: path.into(),
            reason: reason.into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scale {
    Linear,
    Log,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Axis {
    pub parameter: String,
    pub min: f64,
    pub max: f64,
    pub n_points: usize,
    #[serde(default = "Axis::default_scale")]
    pub scale: Scale,
}

impl Axis {
    fn default_scale() -> Scale {
        Scale::Linear
    }

    pub fn values(&self) -> Vec<f64> {
        let n = self.n_points;
        (0..n)
            .map(|k| {
                let f = k as f64 / (n - 1) as f64;
                match self.scale {
                    Scale::Linear => self.min + (self.max - self.min) * f,
                    Scale::Log => (self.min.ln() + (self.max.ln() - self.min.ln()) * f).exp(),
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Output {
    #[serde(rename = "EN_mirror_mirror")]
    EnMirrorMirror,
    #[serde(rename = "EN_beam_beam")]
    EnBeamBeam,
    #[serde(rename = "duan")]
    Duan,
    #[serde(rename = "spectrum")]
    Spectrum,
    #[serde(rename = "stability")]
    Stability,
    #[serde(rename = "steadystate")]
    SteadyState,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BranchSetting {
    Physical,
    Index(usize),
}

impl From<BranchSetting> for BranchPolicy {
    fn from(b: BranchSetting) -> Self {
        match b {
            BranchSetting::Physical => BranchPolicy::Physical,
            BranchSetting::Index(i) => BranchPolicy::Index(i),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    pub root_abs_tol: f64,
    pub steady_residual_rel_tol: f64,
    pub lyapunov_rel_tol: f64,
    pub physicality_tol: f64,
    /// Stable iff every `Re(eig) < −margin * omega_m`.
    pub stability_margin_over_omega_m: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            root_abs_tol: 1e-12,
            steady_residual_rel_tol: 1e-10,
            lyapunov_rel_tol: 1e-10,
            physicality_tol: 1e-10,
            stability_margin_over_omega_m: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumGrid {
    pub min_over_omega_m: f64,
    pub max_over_omega_m: f64,
    pub n_points: usize,
}

impl Default for SpectrumGrid {
    fn default() -> Self {
        SpectrumGrid {
            min_over_omega_m: -3.0,
            max_over_omega_m: 3.0,
            n_points: 601,
        }
    }
}

fn default_outputs() -> Vec<Output> {
    vec![
        Output::SteadyState,
        Output::Stability,
        Output::EnMirrorMirror,
        Output::EnBeamBeam,
        Output::Duan,
    ]
}

fn default_beam_frequency() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub base: Map<String, Value>,
    pub axes: Vec<Axis>,
    #[serde(default = "default_outputs")]
    pub outputs: Vec<Output>,
    #[serde(default = "default_branch")]
    pub branch_policy: BranchSetting,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub spectrum: SpectrumGrid,
    /// Sideband frequency of the beam-beam output columns, in units of omega_m.
    #[serde(default = "default_beam_frequency")]
    pub beam_frequency_over_omega_m: f64,
}

fn default_branch() -> BranchSetting {
    BranchSetting::Physical
}

/// Accepted spellings of each physical quantity.
const QUANTITIES: &[(&str, &[&str])] = &[
    ("omega_m", &["omega_m", "omega_m_hz"]),
    (
        "gamma_m",
        &["gamma_m", "gamma_m_hz", "gamma_m_over_omega_m"],
    ),
    ("kappa", &["kappa", "kappa_hz", "kappa_over_omega_m"]),
    ("omega_c", &["omega_c", "omega_c_hz", "wavelength"]),
    (
        "detuning",
        &[
            "detuning",
            "detuning_hz",
            "detuning_over_omega_m",
            "omega_p",
            "omega_p_hz",
        ],
    ),
    ("cavity_length", &["cavity_length"]),
    ("drive_power", &["drive_power"]),
    ("mirror_mass", &["mirror_mass"]),
    ("temperature", &["temperature"]),
    (
        "lambda",
        &["lambda", "lambda_hz", "lambda_over_omega_m", "coulomb"],
    ),
];

const COULOMB_KEYS: [&str; 3] = ["q1", "q2", "r0"];

fn quantity_of(key: &str) -> Option<&'static str> {
    QUANTITIES
        .iter()
        .find(|(_, keys)| keys.contains(&key))
        .map(|(q, _)| *q)
}

/// Parameter paths accepted by sweep axes.
pub fn parameter_paths() -> Vec<String> {
    let mut out: Vec<String> = QUANTITIES
        .iter()
        .flat_map(|(_, keys)| keys.iter())
        .filter(|k| **k != "coulomb")
        .map(|k| k.to_string())
        .collect();
    out.extend(COULOMB_KEYS.iter().map(|k| format!("coulomb.{k}")));
    out
}

fn strip_base(path: &str) -> &str {
    path.strip_prefix("base.").unwrap_or(path)
}

impl SweepConfig {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: SweepConfig = serde_path_to_error::deserialize(de)
            .map_err(|e| ConfigError::new(e.path().to_string(), e.inner().to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.axes.is_empty() || self.axes.len() > 2 {
            return Err(ConfigError::new("axes", "expected 1 or 2 axes"));
        }
        let valid = parameter_paths();
        for (i, axis) in self.axes.iter().enumerate() {
            let at = |f: &str| format!("axes[{i}].{f}");
            if !valid.iter().any(|p| p == strip_base(&axis.parameter)) {
                return Err(ConfigError::new(
                    at("parameter"),
                    format!("unknown parameter `{}`", axis.parameter),
                ));
            }
            if axis.n_points < 2 {
                return Err(ConfigError::new(at("n_points"), "must be >= 2"));
            }
            if !(axis.min.is_finite() && axis.max.is_finite()) {
                return Err(ConfigError::new(at("min"), "bounds must be finite"));
            }
            if axis.scale == Scale::Log && !(axis.min > 0.0 && axis.max > 0.0) {
                return Err(ConfigError::new(
                    at("scale"),
                    "log scale needs positive bounds",
                ));
            }
        }
        if self.axes.len() == 2
            && strip_base(&self.axes[0].parameter) == strip_base(&self.axes[1].parameter)
        {
            return Err(ConfigError::new("axes[1].parameter", "duplicate axis"));
        }
        if self.spectrum.n_points < 2 {
            return Err(ConfigError::new("spectrum.n_points", "must be >= 2"));
        }
        if !self.beam_frequency_over_omega_m.is_finite() {
            return Err(ConfigError::new(
                "beam_frequency_over_omega_m",
                "must be finite",
            ));
        }
        // Structural check of the base block; values are checked per point.
        resolve_base(&self.base)?;
        Ok(())
    }

    /// Grid points in row-major order (last axis fastest).
    pub fn grid(&self) -> Vec<Vec<f64>> {
        let values: Vec<Vec<f64>> = self.axes.iter().map(Axis::values).collect();
        let mut out = vec![Vec::new()];
        for vals in &values {
            out = out
                .into_iter()
                .flat_map(|prefix| {
                    vals.iter().map(move |&v| {
                        let mut p = prefix.clone();
                        p.push(v);
                        p
                    })
                })
                .collect();
        }
        out
    }

    /// Physical parameters at one grid point.
    pub fn params_at(&self, point: &[f64]) -> Result<PhysicalParams<f64>, ConfigError> {
        let mut base = self.base.clone();
        for (axis, &v) in self.axes.iter().zip(point) {
            set_path(&mut base, strip_base(&axis.parameter), v);
        }
        resolve_base(&base)
    }

    pub fn wants(&self, o: Output) -> bool {
        self.outputs.contains(&o)
    }
}

fn set_path(base: &mut Map<String, Value>, path: &str, v: f64) {
    if let Some(sub) = path.strip_prefix("coulomb.") {
        for (_, keys) in QUANTITIES.iter().filter(|(q, _)| *q == "lambda") {
            for k in keys.iter().filter(|k| **k != "coulomb") {
                base.remove(*k);
            }
        }
        let entry = base
            .entry("coulomb")
            .or_insert_with(|| Value::Object(Map::new()));
        if let Value::Object(m) = entry {
            m.insert(sub.to_string(), Value::from(v));
        }
        return;
    }
    if let Some(q) = quantity_of(path) {
        let keys = QUANTITIES.iter().find(|(name, _)| *name == q).unwrap().1;
        for k in keys {
            base.remove(*k);
        }
    }
    base.insert(path.to_string(), Value::from(v));
}

fn number(base: &Map<String, Value>, key: &str) -> Result<f64, ConfigError> {
    base[key]
        .as_f64()
        .ok_or_else(|| ConfigError::new(format!("base.{key}"), "expected a number"))
}

/// The single spelling given for `quantity`, if any.
fn pick<'a>(base: &Map<String, Value>, quantity: &str) -> Result<Option<&'a str>, ConfigError> {
    let keys = QUANTITIES.iter().find(|(q, _)| *q == quantity).unwrap().1;
    let present: Vec<&str> = keys
        .iter()
        .copied()
        .filter(|k| base.contains_key(*k))
        .collect();
    match present.as_slice() {
        [] => Ok(None),
        [one] => Ok(Some(*one)),
        [first, second, ..] => Err(ConfigError::new(
            format!("base.{second}"),
            format!("conflicts with `{first}`; give one spelling per quantity"),
        )),
    }
}

fn require<'a>(base: &Map<String, Value>, quantity: &str) -> Result<&'a str, ConfigError> {
    pick(base, quantity)?.ok_or_else(|| {
        let keys = QUANTITIES.iter().find(|(q, _)| *q == quantity).unwrap().1;
        ConfigError::new(
            format!("base.{}", keys[0]),
            format!("missing; one of {keys:?} is required"),
        )
    })
}

/// Converts the `base` object to SI physical parameters.
pub fn resolve_base(base: &Map<String, Value>) -> Result<PhysicalParams<f64>, ConfigError> {
    for key in base.keys() {
        if quantity_of(key).is_none() && key != "pressure_sign" && key != "symmetric" {
            return Err(ConfigError::new(format!("base.{key}"), "unknown field"));
        }
    }
    let omega_m = match require(base, "omega_m")? {
        "omega_m" => number(base, "omega_m")?,
        _ => TAU * number(base, "omega_m_hz")?,
    };
    let rate = |quantity: &str| -> Result<f64, ConfigError> {
        let key = require(base, quantity)?;
        let v = number(base, key)?;
        Ok(if key.ends_with("_hz") {
            TAU * v
        } else if key.ends_with("_over_omega_m") {
            v * omega_m
        } else {
            v
        })
    };
    let gamma_m = rate("gamma_m")?;
    let kappa = rate("kappa")?;
    let omega_c = match require(base, "omega_c")? {
        "omega_c" => number(base, "omega_c")?,
        "omega_c_hz" => TAU * number(base, "omega_c_hz")?,
        _ => TAU * SPEED_OF_LIGHT / number(base, "wavelength")?,
    };
    let drive = match require(base, "detuning")? {
        "omega_p" => Drive::Frequency(number(base, "omega_p")?),
        "omega_p_hz" => Drive::Frequency(TAU * number(base, "omega_p_hz")?),
        _ => Drive::Detuning(rate("detuning")?),
    };
    let coulomb = match pick(base, "lambda")? {
        None => Coulomb::Direct { lambda: 0.0 },
        Some("coulomb") => {
            let group = base["coulomb"].as_object().ok_or_else(|| {
                ConfigError::new("base.coulomb", "expected an object with q1, q2, r0")
            })?;
            for k in group.keys() {
                if !COULOMB_KEYS.contains(&k.as_str()) {
                    return Err(ConfigError::new(
                        format!("base.coulomb.{k}"),
                        "unknown field",
                    ));
                }
            }
            let get = |k: &str| {
                group.get(k).and_then(Value::as_f64).ok_or_else(|| {
                    ConfigError::new(format!("base.coulomb.{k}"), "expected a number")
                })
            };
            Coulomb::Charges {
                q1: get("q1")?,
                q2: get("q2")?,
                r0: get("r0")?,
            }
        }
        Some(_) => Coulomb::Direct {
            lambda: rate("lambda")?,
        },
    };
    let pressure_sign = match base.get("pressure_sign") {
        None => PressureSign::Uniform,
        Some(v) => match v.as_str() {
            Some("uniform") => PressureSign::Uniform,
            Some("alternating") => PressureSign::Alternating,
            _ => {
                return Err(ConfigError::new(
                    "base.pressure_sign",
                    "expected \"uniform\" or \"alternating\"",
                ))
            }
        },
    };
    let symmetric = match base.get("symmetric") {
        None => true,
        Some(v) => v
            .as_bool()
            .ok_or_else(|| ConfigError::new("base.symmetric", "expected a boolean"))?,
    };
    let scalar = |key: &str| -> Result<f64, ConfigError> {
        require(base, key)?;
        number(base, key)
    };
    Ok(PhysicalParams {
        omega_m,
        gamma_m,
        kappa,
        omega_c,
        drive,
        cavity_length: scalar("cavity_length")?,
        drive_power: scalar("drive_power")?,
        mirror_mass: scalar("mirror_mass")?,
        bath_temperature: scalar("temperature")?,
        coulomb,
        pressure_sign,
        symmetric,
    })
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    pub(crate) fn reference_json() -> String {
        r#"{
            "base": {
                "omega_m_hz": 10e6, "gamma_m_hz": 100, "kappa_over_omega_m": 0.8,
                "wavelength": 1064e-9, "detuning_over_omega_m": 1.0, "cavity_length": 25e-3,
                "drive_power": 50e-3, "mirror_mass": 20e-12, "temperature": 0.3,
                "lambda_over_omega_m": 0.5
            },
            "axes": [{"parameter": "detuning_over_omega_m", "min": 0.1, "max": 2.0, "n_points": 4}]
        }"#
        .to_string()
    }

    #[test]
    fn parses_reference_config() {
        let cfg = SweepConfig::from_json(&reference_json()).unwrap();
        let p = resolve_base(&cfg.base).unwrap();
        assert!((p.omega_m - TAU * 1e7).abs() < 1e-6);
        assert!((p.kappa - 0.8 * p.omega_m).abs() < 1e-6);
        assert_eq!(
            p.coulomb,
            Coulomb::Direct {
                lambda: 0.5 * p.omega_m
            }
        );
        assert_eq!(cfg.outputs, default_outputs());
        assert_eq!(cfg.branch_policy, BranchSetting::Physical);
    }

    #[test]
    fn axis_overrides_other_spellings() {
        let text = reference_json().replace(
            "\"detuning_over_omega_m\", \"min\": 0.1, \"max\": 2.0",
            "\"detuning_hz\", \"min\": 1e6, \"max\": 2e6",
        );
        let cfg = SweepConfig::from_json(&text).unwrap();
        let p = cfg.params_at(&[1e6]).unwrap();
        assert_eq!(p.drive, Drive::Detuning(TAU * 1e6));
    }

    #[test]
    fn grid_is_row_major() {
        let mut cfg = SweepConfig::from_json(&reference_json()).unwrap();
        cfg.axes.push(Axis {
            parameter: "drive_power".into(),
            min: 1.0,
            max: 100.0,
            n_points: 3,
            scale: Scale::Log,
        });
        let g = cfg.grid();
        assert_eq!(g.len(), 12);
        assert_eq!(g[0], vec![0.1, 1.0]);
        assert!((g[1][1] - 10.0).abs() < 1e-12);
        assert_eq!(g[3][0], g[0][0] + (2.0 - 0.1) / 3.0);
    }

    #[test]
    fn errors_carry_field_paths() {
        let cases = [
            (
                reference_json().replace("\"n_points\": 4", "\"n_points\": 1"),
                "axes[0].n_points",
            ),
            (
                reference_json().replace(
                    "\"parameter\": \"detuning_over_omega_m\"",
                    "\"parameter\": \"nope\"",
                ),
                "axes[0].parameter",
            ),
            (
                reference_json().replace(
                    "\"temperature\": 0.3",
                    "\"temperature\": 0.3, \"temperatur\": 1",
                ),
                "base.temperatur",
            ),
            (
                reference_json().replace(
                    "\"gamma_m_hz\": 100",
                    "\"gamma_m_hz\": 100, \"gamma_m\": 600",
                ),
                "base.gamma_m_hz",
            ),
            (
                reference_json().replace("\"mirror_mass\": 20e-12,", ""),
                "base.mirror_mass",
            ),
            (
                reference_json().replace("\"min\": 0.1", "\"min\": \"x\""),
                "axes[0].min",
            ),
        ];
        for (text, path) in cases {
            let err = SweepConfig::from_json(&text).unwrap_err();
            assert_eq!(err.path, path, "{err}");
        }
    }

    #[test]
    fn coulomb_group_and_axis() {
        let text = reference_json().replace(
            "\"lambda_over_omega_m\": 0.5",
            "\"coulomb\": {\"q1\": 1e-9, \"q2\": 1e-9, \"r0\": 1e-3}",
        );
        let cfg = SweepConfig::from_json(&text).unwrap();
        let p = resolve_base(&cfg.base).unwrap();
        assert_eq!(
            p.coulomb,
            Coulomb::Charges {
                q1: 1e-9,
                q2: 1e-9,
                r0: 1e-3
            }
        );
        let mut base = cfg.base.clone();
        set_path(&mut base, "coulomb.r0", 2e-3);
        assert_eq!(
            resolve_base(&base).unwrap().coulomb,
            Coulomb::Charges {
                q1: 1e-9,
                q2: 1e-9,
                r0: 2e-3
            }
        );
    }
}
