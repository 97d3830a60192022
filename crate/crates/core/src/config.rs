//! Scenario and parameter files (TOML, SI units carried in key suffixes).
//!
//! ```toml
//! name = "flat-w25-medium"
//!
//! [foot]
//! shape = "flat"
//! length_m = 0.065
//! width_m = 0.065
//!
//! [mud]
//! water_content = 0.25
//!
//! [trajectory]
//! kind = "gait"
//! speed_m_s = 0.2
//! step_length_m = 0.1
//! depth_m = 0.02
//! ```

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::calibration::{builtin_params, Direction};
use crate::error::{MudError, Result};
use crate::geometry::{AreaSchedule, FootShape, ScheduleKey, TriangleMesh};
use crate::rheology::{MudDirectionalParams, DEFAULT_REFERENCE_SPEED};
use crate::trajectory::{gait_profile, plate_protocol, ForceModel, MotionProfile, SimulationOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ShapeKind {
    Flat,
    SemiCylinder,
    SemiSphere,
    VariableArea,
    Mesh,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FootConfig {
    pub shape: ShapeKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub length_m: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub width_m: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius_m: Option<f64>,
    /// Variable area: area while intruding and dwelling.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub intrusion_area_m2: Option<f64>,
    /// Variable area: area while retracting.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub retraction_area_m2: Option<f64>,
    /// Variable area: `"depth"` or `"time"` keyed table instead of the two phase areas.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schedule_key: Option<String>,
    /// `[[key, area_m2], ...]`, key in m or s.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schedule: Option<Vec<[f64; 2]>>,
    /// Triangle file, relative to the config file.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mesh_path: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MudConfig {
    /// Built-in table row (0.25–0.45).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub water_content: Option<f64>,
    /// Parameter file with `[vertical]` and `[horizontal]` tables.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub params_path: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub l_c_vertical_m: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub l_c_horizontal_m: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference_speed_m_s: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TrajectoryKind {
    Gait,
    Plate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrajectoryConfig {
    pub kind: TrajectoryKind,
    /// Gait: peak foot speed; plate: intrusion/retraction speed.
    pub speed_m_s: f64,
    pub depth_m: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step_length_m: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dwell_s: Option<f64>,
    /// Rest appended after the last stance, at the final position.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hold_s: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cycles: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub swing_time_s: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub swing_lift_m: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub swing_advance_m: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt_s: Option<f64>,
    /// Integrate over a tessellation instead of the closed forms.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mesh: Option<bool>,
    /// Also run the tessellated model and report the difference.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mesh_resolution: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reset_per_cycle: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dir: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trace_file: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub summary_file: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub foot: FootConfig,
    pub mud: MudConfig,
    pub trajectory: TrajectoryConfig,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

pub const DEFAULT_MESH_RESOLUTION: usize = 10_000;
pub const DEFAULT_STEP_LENGTH: f64 = 0.1;

/// Everything needed for one simulation run.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub name: String,
    pub shape: FootShape,
    pub params_v: MudDirectionalParams,
    pub params_h: MudDirectionalParams,
    pub profile: MotionProfile,
    pub options: SimulationOptions,
    pub oracle: bool,
    pub mesh_resolution: usize,
}

fn need(field: &str, v: Option<f64>) -> Result<f64> {
    match v {
        Some(x) if x.is_finite() && x > 0.0 => Ok(x),
        Some(x) => Err(MudError::config(field, format!("must be finite and > 0, got {x}"))),
        None => Err(MudError::config(field, "missing")),
    }
}

fn resolve(base: Option<&Path>, p: &Path) -> PathBuf {
    match base {
        Some(b) if p.is_relative() => b.join(p),
        _ => p.to_path_buf(),
    }
}

impl ScenarioConfig {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| {
            let msg = e.message().to_string();
            let field = msg
                .split('`')
                .nth(1)
                .map(str::to_string)
                .unwrap_or_else(|| "scenario".into());
            let line = e
                .span()
                .map(|s| format!(" (line {})", text[..s.start].lines().count().max(1)))
                .unwrap_or_default();
            MudError::config(field, format!("{msg}{line}"))
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::parse(&fs::read_to_string(path)?)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| MudError::config("scenario", e.to_string()))
    }

    pub fn shape(&self, base: Option<&Path>) -> Result<FootShape> {
        let f = &self.foot;
        let shape = match f.shape {
            ShapeKind::Flat => FootShape::Flat {
                length: need("foot.length_m", f.length_m)?,
                width: need("foot.width_m", f.width_m)?,
            },
            ShapeKind::SemiCylinder => FootShape::SemiCylinder {
                radius: need("foot.radius_m", f.radius_m)?,
                width: need("foot.width_m", f.width_m)?,
            },
            ShapeKind::SemiSphere => FootShape::SemiSphere {
                radius: need("foot.radius_m", f.radius_m)?,
            },
            ShapeKind::VariableArea => {
                let schedule = match (&f.schedule, f.intrusion_area_m2, f.retraction_area_m2) {
                    (Some(knots), None, None) => {
                        let key = match f.schedule_key.as_deref() {
                            Some("depth") | None => ScheduleKey::Depth,
                            Some("time") => ScheduleKey::Time,
                            Some(other) => {
                                return Err(MudError::config(
                                    "foot.schedule_key",
                                    format!("expected `depth` or `time`, got `{other}`"),
                                ))
                            }
                        };
                        AreaSchedule::table(key, knots.iter().map(|k| (k[0], k[1])).collect())
                    }
                    (None, a, r) => AreaSchedule::phase(
                        need("foot.intrusion_area_m2", a)?,
                        need("foot.retraction_area_m2", r)?,
                    ),
                    _ => {
                        return Err(MudError::config(
                            "foot.schedule",
                            "give either a schedule table or the two phase areas, not both",
                        ))
                    }
                }
                .map_err(|e| MudError::config("foot.schedule", e.to_string()))?;
                FootShape::VariableAreaFlat(schedule)
            }
            ShapeKind::Mesh => {
                let p = f
                    .mesh_path
                    .as_ref()
                    .ok_or_else(|| MudError::config("foot.mesh_path", "missing"))?;
                FootShape::Mesh(
                    TriangleMesh::load(resolve(base, p))
                        .map_err(|e| MudError::config("foot.mesh_path", e.to_string()))?,
                )
            }
        };
        shape
            .validate()
            .map_err(|e| MudError::config("foot", e.to_string()))?;
        Ok(shape)
    }

    /// Vertical and horizontal parameters, rescaled to the foot's characteristic length.
    pub fn params(
        &self,
        shape: &FootShape,
        base: Option<&Path>,
    ) -> Result<(MudDirectionalParams, MudDirectionalParams)> {
        let m = &self.mud;
        let reference = m.reference_speed_m_s.unwrap_or(DEFAULT_REFERENCE_SPEED);
        let (v, h, from_table) = match (m.water_content, &m.params_path) {
            (Some(w), None) => {
                let get = |d| {
                    builtin_params(w, d).map_err(|e| MudError::config("mud.water_content", e.to_string()))
                };
                (get(Direction::Vertical)?, get(Direction::Horizontal)?, true)
            }
            (None, Some(p)) => {
                let f = ParamsFile::load(resolve(base, p))
                    .map_err(|e| MudError::config("mud.params_path", e.to_string()))?;
                (f.vertical, f.horizontal, false)
            }
            (None, None) => {
                return Err(MudError::config("mud", "set either water_content or params_path"))
            }
            (Some(_), Some(_)) => {
                return Err(MudError::config(
                    "mud",
                    "water_content and params_path are mutually exclusive",
                ))
            }
        };
        let shape_lc = shape.characteristic_length();
        let lc = |over: Option<f64>, p: &MudDirectionalParams| match over {
            Some(l) => Some(l),
            None if from_table => Some(shape_lc),
            None => m.reference_speed_m_s.map(|_| p.l_c),
        };
        let rebase = |over: Option<f64>, field: &str, p: MudDirectionalParams| -> Result<_> {
            match lc(over, &p) {
                Some(l) if l.is_finite() && l > 0.0 => Ok(p.with_characteristic_length(l, reference)),
                Some(l) => Err(MudError::config(field, format!("must be > 0, got {l}"))),
                None => Ok(p),
            }
        };
        let v = rebase(m.l_c_vertical_m, "mud.l_c_vertical_m", v)?;
        let h = rebase(m.l_c_horizontal_m, "mud.l_c_horizontal_m", h)?;
        v.validate().map_err(|e| MudError::config("mud.vertical", e.to_string()))?;
        h.validate().map_err(|e| MudError::config("mud.horizontal", e.to_string()))?;
        Ok((v, h))
    }

    /// Motion profile with `dt` from the override, the config, or the
    /// parameters' default, in that order.
    pub fn profile(
        &self,
        params: (&MudDirectionalParams, &MudDirectionalParams),
        dt_override: Option<f64>,
    ) -> Result<MotionProfile> {
        let t = &self.trajectory;
        let dt = dt_override
            .or(self.solver.dt_s)
            .unwrap_or_else(|| params.0.default_dt().min(params.1.default_dt()));
        if !(dt.is_finite() && dt > 0.0) {
            return Err(MudError::config("solver.dt_s", format!("must be > 0, got {dt}")));
        }
        let speed = need("trajectory.speed_m_s", Some(t.speed_m_s))?;
        let depth = need("trajectory.depth_m", Some(t.depth_m))?;
        let stance = match t.kind {
            TrajectoryKind::Gait => {
                let step = t.step_length_m.unwrap_or(DEFAULT_STEP_LENGTH);
                gait_profile(step, depth, speed, dt)
                    .map_err(|e| MudError::config("trajectory", e.to_string()))?
            }
            TrajectoryKind::Plate => {
                let dwell = need("trajectory.dwell_s", t.dwell_s)?;
                plate_protocol(depth, speed, dwell, dt)
                    .map_err(|e| MudError::config("trajectory", e.to_string()))?
            }
        };
        let cycles = t.cycles.unwrap_or(1);
        if cycles == 0 {
            return Err(MudError::config("trajectory.cycles", "must be >= 1"));
        }
        let mut profile = if cycles > 1 {
            let swing = need("trajectory.swing_time_s", Some(t.swing_time_s.unwrap_or(0.3)))?;
            stance.repeat_with_swing(
                cycles,
                swing,
                t.swing_advance_m.unwrap_or(0.0),
                t.swing_lift_m.unwrap_or(0.03),
            )
        } else {
            stance
        };
        if let Some(h) = t.hold_s {
            if !(h >= 0.0) {
                return Err(MudError::config("trajectory.hold_s", format!("must be >= 0, got {h}")));
            }
            profile = profile.with_hold(h);
        }
        Ok(profile)
    }

    /// Resolves the config into a runnable scenario. Relative paths are taken
    /// from `base` (normally the config file's directory).
    pub fn build(&self, base: Option<&Path>, dt_override: Option<f64>) -> Result<Scenario> {
        let shape = self.shape(base)?;
        let (params_v, params_h) = self.params(&shape, base)?;
        let profile = self.profile((&params_v, &params_h), dt_override)?;
        let s = &self.solver;
        let mesh_resolution = s.mesh_resolution.unwrap_or(DEFAULT_MESH_RESOLUTION);
        if mesh_resolution < 8 {
            return Err(MudError::config("solver.mesh_resolution", "must be >= 8"));
        }
        let use_mesh = s.mesh.unwrap_or(matches!(shape, FootShape::Mesh(_)));
        let options = SimulationOptions {
            force_model: if use_mesh {
                ForceModel::Mesh {
                    resolution: mesh_resolution,
                }
            } else {
                ForceModel::ClosedForm
            },
            reset_per_cycle: s.reset_per_cycle.unwrap_or(true),
        };
        Ok(Scenario {
            name: self.name.clone().unwrap_or_else(|| shape.name().to_string()),
            shape,
            params_v,
            params_h,
            profile,
            options,
            oracle: s.oracle.unwrap_or(false),
            mesh_resolution,
        })
    }
}

/// Parameter file: one table per direction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsFile {
    pub vertical: MudDirectionalParams,
    pub horizontal: MudDirectionalParams,
}

impl ParamsFile {
    pub fn builtin(water_content: f64) -> Result<Self> {
        Ok(ParamsFile {
            vertical: builtin_params(water_content, Direction::Vertical)?,
            horizontal: builtin_params(water_content, Direction::Horizontal)?,
        })
    }

    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| MudError::config("params", e.to_string()))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::parse(&fs::read_to_string(path)?)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| MudError::config("params", e.to_string()))
    }

    pub fn get(&self, d: Direction) -> &MudDirectionalParams {
        match d {
            Direction::Vertical => &self.vertical,
            Direction::Horizontal => &self.horizontal,
        }
    }

    pub fn set(&mut self, d: Direction, p: MudDirectionalParams) {
        match d {
            Direction::Vertical => self.vertical = p,
            Direction::Horizontal => self.horizontal = p,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const FLAT: &str = r#"
name = "flat"

[foot]
shape = "flat"
length_m = 0.065
width_m = 0.065

[mud]
water_content = 0.25

[trajectory]
kind = "gait"
speed_m_s = 0.2
depth_m = 0.02
"#;

    #[test]
    fn round_trip_is_identity() {
        let a = ScenarioConfig::parse(FLAT).unwrap();
        let b = ScenarioConfig::parse(&a.to_toml().unwrap()).unwrap();
        assert_eq!(a, b);
        let p = ParamsFile::builtin(0.35).unwrap();
        assert_eq!(ParamsFile::parse(&p.to_toml().unwrap()).unwrap(), p);
    }

    #[test]
    fn builds_a_gait_scenario() {
        let s = ScenarioConfig::parse(FLAT).unwrap().build(None, None).unwrap();
        assert_eq!(s.params_v.l_c, 0.065);
        assert!(s.profile.len() > 100);
        assert_eq!(s.options.force_model, ForceModel::ClosedForm);
    }

    #[test]
    fn sphere_rescales_characteristic_length() {
        let text = FLAT
            .replace("shape = \"flat\"", "shape = \"semi-sphere\"\nradius_m = 0.045")
            .replace("length_m = 0.065\nwidth_m = 0.065\n", "");
        let s = ScenarioConfig::parse(&text).unwrap().build(None, None).unwrap();
        assert!((s.params_v.l_c - 0.09).abs() < 1e-15);
    }

    #[test]
    fn unknown_field_is_named() {
        let err = ScenarioConfig::parse(&FLAT.replace("width_m", "widht_m")).unwrap_err();
        assert!(err.to_string().contains("widht_m"), "{err}");
    }

    #[test]
    fn missing_dimension_is_named() {
        let err = ScenarioConfig::parse(&FLAT.replace("width_m = 0.065\n", ""))
            .unwrap()
            .build(None, None)
            .unwrap_err();
        assert!(err.to_string().contains("foot.width_m"), "{err}");
    }

    #[test]
    fn water_content_out_of_table() {
        let err = ScenarioConfig::parse(&FLAT.replace("0.25", "0.6"))
            .unwrap()
            .build(None, None)
            .unwrap_err();
        assert!(err.to_string().contains("mud.water_content"), "{err}");
    }
}
