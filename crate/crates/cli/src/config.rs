//! Run configurations. Each command starts from its defaults, takes the
//! command-line flags, then the `--config` file on top; the merged document is
//! deserialized strictly, so unknown keys are rejected.

use std::f64::consts::PI;
use std::path::Path;

use dirac_lab::ab_interference::CutDirection;
use dirac_lab::vortex::SolverOptions;
use dirac_lab::{DoubleSlit, SweepQuadrature};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::CliError;

/// Scalar flags shared by the subcommands.
#[derive(Debug, Clone, Copy, Default)]
pub struct Flags {
    pub q: Option<f64>,
    pub g: Option<f64>,
    pub tol: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckConfig {
    pub q: Option<f64>,
    pub g: Option<f64>,
    pub tol: f64,
}

impl Default for CheckConfig {
    fn default() -> Self {
        Self { q: None, g: None, tol: 1e-9 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldsConfig {
    pub q: f64,
    pub g: f64,
    pub mu: f64,
    pub radii: Vec<f64>,
    pub tube_radius: f64,
    /// Gauss–Legendre order per unit of `π` for the sphere-flux quadrature.
    pub sphere_order: usize,
}

impl Default for FieldsConfig {
    fn default() -> Self {
        Self {
            q: 1.0,
            g: 0.5,
            mu: 1.0,
            radii: vec![0.5, 1.0, 2.0, 5.0, 10.0],
            tube_radius: 1.0,
            sphere_order: 16,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HolonomyConfig {
    pub q: f64,
    pub g: f64,
    pub mu: f64,
    pub tol: f64,
    /// Polar angles of the latitude loops around the pole.
    pub thetas: Vec<f64>,
    pub radius: f64,
    /// Radius of the loop around the flux tubes.
    pub tube_loop_radius: f64,
    pub base_vertices: usize,
    pub levels: usize,
}

impl Default for HolonomyConfig {
    fn default() -> Self {
        Self {
            q: 1.0,
            g: 0.5,
            mu: 1.0,
            tol: 1e-9,
            thetas: vec![0.25, 0.5, 1.0, PI / 2.0, 2.0, 2.5, 3.0],
            radius: 1.0,
            tube_loop_radius: 50.0,
            base_vertices: 64,
            levels: 3,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AngmomConfig {
    pub q: f64,
    pub g: f64,
    pub mu_list: Vec<f64>,
    pub d_list: Vec<f64>,
    pub quadrature: SweepQuadrature,
}

impl Default for AngmomConfig {
    fn default() -> Self {
        Self {
            q: 1.0,
            g: 0.5,
            mu_list: vec![0.0, 0.5, 1.0],
            d_list: vec![0.5, 1.0, 2.0, 4.0, 8.0],
            quadrature: SweepQuadrature::default(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AbsimConfig {
    pub setup: DoubleSlit,
    /// AB phases `qΦ` to simulate against the free run.
    pub phases: Vec<f64>,
    pub cut: CutDirection,
    /// Write full `|ψ|²` snapshots at the final step.
    pub snapshots: bool,
}

impl Default for AbsimConfig {
    fn default() -> Self {
        Self {
            setup: DoubleSlit::default(),
            phases: vec![PI / 2.0, PI, 1.5 * PI, 2.0 * PI],
            cut: CutDirection::Right,
            snapshots: true,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VortexConfig {
    pub q: f64,
    pub v: f64,
    /// Quartic coupling; when absent it follows from `beta`.
    pub lambda: Option<f64>,
    /// `λ/(2q²)`, used when `lambda` is absent.
    pub beta: f64,
    pub n: i64,
    /// Outer radius; when absent, twenty of the longer correlation lengths.
    pub r_max: Option<f64>,
    pub grid: usize,
    pub solver: SolverOptions<f64>,
}

impl Default for VortexConfig {
    fn default() -> Self {
        Self {
            q: 1.0,
            v: 1.0,
            lambda: None,
            beta: 1.0,
            n: 1,
            r_max: None,
            grid: 512,
            solver: SolverOptions::default(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfineConfig {
    pub vortex: VortexConfig,
    pub lengths: Vec<f64>,
}

impl Default for ConfineConfig {
    fn default() -> Self {
        Self { vortex: VortexConfig::default(), lengths: vec![1.0, 2.0, 5.0, 10.0, 20.0, 50.0] }
    }
}

/// Where a flag lands in each command's document.
pub trait FlagTargets {
    const Q: Option<&'static str> = Some("/q");
    const G: Option<&'static str> = Some("/g");
    const TOL: Option<&'static str> = None;
}

impl FlagTargets for CheckConfig {
    const TOL: Option<&'static str> = Some("/tol");
}
impl FlagTargets for FieldsConfig {}
impl FlagTargets for HolonomyConfig {
    const TOL: Option<&'static str> = Some("/tol");
}
impl FlagTargets for AngmomConfig {
    const TOL: Option<&'static str> = Some("/quadrature/target_tol");
}
impl FlagTargets for AbsimConfig {
    const Q: Option<&'static str> = Some("/setup/q");
    const G: Option<&'static str> = None;
}
impl FlagTargets for VortexConfig {
    const G: Option<&'static str> = None;
    const TOL: Option<&'static str> = Some("/solver/tolerance");
}
impl FlagTargets for ConfineConfig {
    const Q: Option<&'static str> = Some("/vortex/q");
    const G: Option<&'static str> = None;
    const TOL: Option<&'static str> = Some("/vortex/solver/tolerance");
}

/// Resolved configuration and its canonical JSON form.
pub struct Resolved<C> {
    pub config: C,
    pub document: Value,
}

pub fn resolve<C>(flags: &Flags, path: Option<&Path>) -> Result<Resolved<C>, CliError>
where
    C: Default + Serialize + DeserializeOwned + FlagTargets,
{
    let mut doc = serde_json::to_value(C::default()).map_err(|e| CliError::Usage(e.to_string()))?;
    for (flag, target, name) in [(flags.q, C::Q, "--q"), (flags.g, C::G, "--g"), (flags.tol, C::TOL, "--tol")]
    {
        let Some(value) = flag else { continue };
        let Some(pointer) = target else {
            return Err(CliError::Usage(format!("{name} does not apply to this command")));
        };
        *doc.pointer_mut(pointer).expect("flag target exists in the defaults") = value.into();
    }
    if let Some(path) = path {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        let file: Value = serde_json::from_str(&text)
            .map_err(|e| CliError::Usage(format!("config {} is not valid JSON: {e}", path.display())))?;
        if !file.is_object() {
            return Err(CliError::Usage("config must be a JSON object".into()));
        }
        merge(&mut doc, file);
    }
    let config: C =
        serde_json::from_value(doc).map_err(|e| CliError::Usage(format!("invalid config: {e}")))?;
    // re-serialize so the echo and hash carry every default in canonical form
    let document = serde_json::to_value(&config).map_err(|e| CliError::Usage(e.to_string()))?;
    Ok(Resolved { config, document })
}

/// Overlays `top` on `base`, recursing into objects present in both.
fn merge(base: &mut Value, top: Value) {
    match (base, top) {
        (Value::Object(b), Value::Object(t)) => {
            for (k, v) in t {
                match b.get_mut(&k) {
                    Some(slot) if slot.is_object() && v.is_object() => merge(slot, v),
                    _ => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (slot, v) => *slot = v,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn nested_objects_merge_key_by_key() {
        let mut base = json!({"a": 1, "b": {"c": 2, "d": 3}});
        merge(&mut base, json!({"b": {"d": 4}, "e": 5}));
        assert_eq!(base, json!({"a": 1, "b": {"c": 2, "d": 4}, "e": 5}));
    }

    #[test]
    fn flag_targets_exist_in_defaults() {
        fn probe<C: Default + Serialize + DeserializeOwned + FlagTargets>() {
            let flags = Flags { q: C::Q.map(|_| 2.0), g: C::G.map(|_| 0.25), tol: C::TOL.map(|_| 1e-7) };
            let r = resolve::<C>(&flags, None).unwrap();
            for (p, want) in [(C::Q, 2.0), (C::G, 0.25), (C::TOL, 1e-7)] {
                if let Some(p) = p {
                    assert_eq!(r.document.pointer(p).unwrap().as_f64(), Some(want));
                }
            }
        }
        probe::<CheckConfig>();
        probe::<FieldsConfig>();
        probe::<HolonomyConfig>();
        probe::<AngmomConfig>();
        probe::<AbsimConfig>();
        probe::<VortexConfig>();
        probe::<ConfineConfig>();
    }
}
