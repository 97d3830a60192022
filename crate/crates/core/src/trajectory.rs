//! Motion profiles and the time-stepped foot–mud simulation.

use std::f64::consts::PI;
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use nalgebra::Vector2;
use serde::{Deserialize, Serialize};

use crate::error::{MudError, Result};
use crate::force::{closed_form_force, integrate_mesh, DirectionalStresses, ResultantForce};
use crate::geometry::{heading, FootShape, Vec3};
use crate::rheology::{heaviside_smooth, Drive, MudDirectionalParams, RheologyState, StressParts};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    Intrude,
    Dwell,
    Retract,
    Swing,
}

impl Phase {
    pub fn as_str(&self) -> &'static str {
        match self {
            Phase::Intrude => "intrude",
            Phase::Dwell => "dwell",
            Phase::Retract => "retract",
            Phase::Swing => "swing",
        }
    }
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Phase {
    type Err = MudError;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "intrude" => Ok(Phase::Intrude),
            "dwell" => Ok(Phase::Dwell),
            "retract" => Ok(Phase::Retract),
            "swing" => Ok(Phase::Swing),
            other => Err(MudError::Profile(format!("unknown phase label `{other}`"))),
        }
    }
}

/// Foot kinematics on a uniform time grid. Position is that of the lowest
/// point of the foot; `z = 0` is the mud surface.
#[derive(Debug, Clone, PartialEq)]
pub struct MotionProfile {
    pub dt: f64,
    pub time: Vec<f64>,
    pub position: Vec<Vec3>,
    pub velocity: Vec<Vec3>,
    pub acceleration: Vec<Vec3>,
    pub phase: Vec<Phase>,
    /// Gait cycle index of each sample.
    pub cycle: Vec<u32>,
}

impl MotionProfile {
    pub fn len(&self) -> usize {
        self.time.len()
    }

    pub fn is_empty(&self) -> bool {
        self.time.is_empty()
    }

    pub fn duration(&self) -> f64 {
        self.time.last().copied().unwrap_or(0.0)
    }

    fn push(&mut self, p: Vec3, v: Vec3, a: Vec3, phase: Phase, cycle: u32) {
        let t = self.time.len() as f64 * self.dt;
        self.time.push(t);
        self.position.push(p);
        self.velocity.push(v);
        self.acceleration.push(a);
        self.phase.push(phase);
        self.cycle.push(cycle);
    }

    fn empty(dt: f64) -> Self {
        MotionProfile {
            dt,
            time: Vec::new(),
            position: Vec::new(),
            velocity: Vec::new(),
            acceleration: Vec::new(),
            phase: Vec::new(),
            cycle: Vec::new(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.time.len();
        if n < 2 {
            return Err(MudError::Profile("profile needs at least two samples".into()));
        }
        if [self.position.len(), self.velocity.len(), self.acceleration.len(), self.phase.len(), self.cycle.len()]
            .iter()
            .any(|&l| l != n)
        {
            return Err(MudError::Profile("profile columns have different lengths".into()));
        }
        if !(self.dt > 0.0) {
            return Err(MudError::Profile(format!("dt must be > 0, got {}", self.dt)));
        }
        for w in self.time.windows(2) {
            if ((w[1] - w[0]) - self.dt).abs() > 1e-9 * self.dt.max(w[1].abs()) {
                return Err(MudError::Profile(format!(
                    "non-uniform time grid near t = {}",
                    w[0]
                )));
            }
        }
        Ok(())
    }

    /// Appends a rest of `duration` seconds at the final position.
    pub fn with_hold(mut self, duration: f64) -> Self {
        let steps = (duration / self.dt).round() as usize;
        let last = *self.position.last().expect("non-empty profile");
        let cycle = self.cycle.last().copied().unwrap_or(0);
        for _ in 0..steps {
            self.push(last, Vec3::zeros(), Vec3::zeros(), Phase::Dwell, cycle);
        }
        self
    }

    /// Repeats the profile `cycles` times, joined by an airborne swing that
    /// carries the foot forward by `advance` over `swing_time` seconds at up
    /// to `lift` above the surface.
    pub fn repeat_with_swing(&self, cycles: u32, swing_time: f64, advance: f64, lift: f64) -> Self {
        let mut out = MotionProfile::empty(self.dt);
        let steps = (swing_time / self.dt).round().max(1.0) as usize;
        let span = steps as f64 * self.dt;
        let stride = self.position[self.len() - 1] - self.position[0];
        let mut offset = Vec3::zeros();
        for c in 0..cycles {
            for k in 0..self.len() {
                out.push(
                    self.position[k] + offset,
                    self.velocity[k],
                    self.acceleration[k],
                    self.phase[k],
                    c,
                );
            }
            if c + 1 == cycles {
                break;
            }
            let lift_off = self.position[self.len() - 1] + offset;
            for k in 1..steps {
                let s = k as f64 * self.dt;
                let w = PI * s / span;
                out.push(
                    lift_off + Vec3::new(advance * s / span, 0.0, lift * w.sin().powi(2)),
                    Vec3::new(advance / span, 0.0, lift * PI / span * (2.0 * w).sin()),
                    Vec3::new(0.0, 0.0, 2.0 * lift * (PI / span).powi(2) * (2.0 * w).cos()),
                    Phase::Swing,
                    c,
                );
            }
            offset += stride + Vec3::new(advance, 0.0, 0.0);
        }
        out
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(MudError::Profile(format!("{name} must be > 0, got {v}")))
    }
}

/// Constant-speed vertical intrusion, dwell, and retraction at the same speed.
pub fn plate_protocol(depth: f64, speed: f64, dwell: f64, dt: f64) -> Result<MotionProfile> {
    positive("depth", depth)?;
    positive("speed", speed)?;
    positive("dwell", dwell)?;
    positive("dt", dt)?;
    if dt >= dwell {
        return Err(MudError::Profile(format!(
            "dt ({dt} s) must be shorter than the dwell ({dwell} s)"
        )));
    }
    let t_in = depth / speed;
    let t_out = t_in + dwell;
    let total = 2.0 * t_in + dwell;
    let n = (total / dt).round() as usize;
    let mut p = MotionProfile::empty(dt);
    let eps = 1e-9 * dt;
    for k in 0..=n {
        let t = k as f64 * dt;
        let (d, u, phase) = if t < t_in - eps {
            (speed * t, -speed, Phase::Intrude)
        } else if t < t_out - eps {
            (depth, 0.0, Phase::Dwell)
        } else {
            ((depth - speed * (t - t_out)).max(0.0), speed, Phase::Retract)
        };
        p.push(
            Vec3::new(0.0, 0.0, -d),
            Vec3::new(0.0, 0.0, u),
            Vec3::zeros(),
            phase,
            0,
        );
    }
    Ok(p)
}

/// Stance-phase gait: `z = -D sin²(πt/T)` with constant forward speed `L/T`.
///
/// `T` is chosen so that the peak speed equals `gait_speed`; the step count
/// is rounded up to a multiple of four (shrinking `dt`) so the peak-speed
/// instants `T/4` and `3T/4` and the deepest point `T/2` fall on samples.
pub fn gait_profile(step_length: f64, max_depth: f64, gait_speed: f64, dt: f64) -> Result<MotionProfile> {
    if !(step_length >= 0.0 && step_length.is_finite()) {
        return Err(MudError::Profile(format!("step length must be >= 0, got {step_length}")));
    }
    positive("max depth", max_depth)?;
    positive("gait speed", gait_speed)?;
    positive("dt", dt)?;
    let period = (step_length.powi(2) + (PI * max_depth).powi(2)).sqrt() / gait_speed;
    let n = 4 * ((period / (4.0 * dt)).ceil() as usize).max(1);
    let h = period / n as f64;
    let ux = step_length / period;
    let mut p = MotionProfile::empty(h);
    for k in 0..=n {
        let w = 2.0 * PI * k as f64 / n as f64;
        let (sin_w, cos_w) = match k {
            _ if k == 0 || k == n => (0.0, 1.0),
            _ if 2 * k == n => (0.0, -1.0),
            _ if 4 * k == n => (1.0, 0.0),
            _ if 4 * k == 3 * n => (-1.0, 0.0),
            _ => w.sin_cos(),
        };
        let z = -max_depth * 0.5 * (1.0 - cos_w);
        let uz = -max_depth * PI / period * sin_w;
        let az = -max_depth * 2.0 * PI * PI / (period * period) * cos_w;
        let phase = if 2 * k < n {
            Phase::Intrude
        } else if 2 * k == n {
            Phase::Dwell
        } else {
            Phase::Retract
        };
        p.push(
            Vec3::new(step_length * k as f64 / n as f64, 0.0, z),
            Vec3::new(ux, 0.0, uz),
            Vec3::new(0.0, 0.0, az),
            phase,
            0,
        );
    }
    Ok(p)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ForceModel {
    ClosedForm,
    /// Quadrature over a tessellation with about `resolution` facets.
    Mesh { resolution: usize },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimulationOptions {
    pub force_model: ForceModel,
    /// Reset the rheology states at the start of every gait cycle.
    pub reset_per_cycle: bool,
}

impl Default for SimulationOptions {
    fn default() -> Self {
        Self {
            force_model: ForceModel::ClosedForm,
            reset_per_cycle: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceSample {
    pub t: f64,
    pub position: Vec3,
    pub velocity: Vec3,
    pub force: ResultantForce,
    pub stresses: DirectionalStresses,
    /// Stress breakdown for x, y, z.
    pub parts: [StressParts; 3],
    pub depth: f64,
    pub gamma: [f64; 3],
    pub gamma_dot: [f64; 3],
    pub phase: Phase,
    pub cycle: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ForceTrace {
    pub dt: f64,
    pub samples: Vec<TraceSample>,
}

impl ForceTrace {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn times(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.t).collect()
    }

    /// Force component `axis` (0 = x, 1 = y, 2 = z).
    pub fn force(&self, axis: usize) -> Vec<f64> {
        self.samples.iter().map(|s| s.force.as_array()[axis]).collect()
    }

    pub fn depths(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.depth).collect()
    }

    /// Writes the trace as CSV with 9 significant digits.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record([
            "t", "x", "y", "z", "ux", "uy", "uz", "Fx", "Fy", "Fz", "sigma_x", "sigma_y",
            "sigma_z", "phase",
        ])?;
        for s in &self.samples {
            let vals = [
                s.t,
                s.position.x,
                s.position.y,
                s.position.z,
                s.velocity.x,
                s.velocity.y,
                s.velocity.z,
                s.force.fx,
                s.force.fy,
                s.force.fz,
                s.stresses.sigma_x,
                s.stresses.sigma_y,
                s.stresses.sigma_z,
            ];
            let mut row: Vec<String> = vals.iter().map(|v| format!("{v:.8e}")).collect();
            row.push(s.phase.to_string());
            out.write_record(&row)?;
        }
        out.flush()?;
        Ok(())
    }
}

struct Axis {
    state: RheologyState,
    path: f64,
}

/// Drives of the three directions at one sample: `[x, y, z]`.
fn drives(
    profile: &MotionProfile,
    k: usize,
    paths: [f64; 2],
    lc_h: f64,
    lc_v: f64,
) -> ([Drive; 3], [f64; 3]) {
    let p = profile.position[k];
    let v = profile.velocity[k];
    let a = profile.acceleration[k];
    let depth = (-p.z).max(0.0);
    let contact = p.z <= 0.0;
    // a foot resting on the surface only loads the mud once it moves or
    // accelerates down; this keeps the drive continuous through touchdown
    let engaged = contact && (depth > 0.0 || v.z < 0.0 || (v.z == 0.0 && a.z < 0.0));
    let vertical = if engaged {
        Drive::new(depth / lc_v, -v.z / lc_v, -a.z / lc_v)
    } else {
        Drive::new(depth / lc_v, 0.0, 0.0)
    };
    let sliding = depth > 0.0;
    let horiz = |path: f64, u: f64, acc: f64| {
        if sliding {
            Drive::new(path / lc_h, u.abs() / lc_h, u.signum() * acc / lc_h)
        } else {
            Drive::new(path / lc_h, 0.0, 0.0)
        }
    };
    // the suction switch follows the kinematic rate even out of contact
    let switch_rates = [v.x.abs() / lc_h, v.y.abs() / lc_h, -v.z / lc_v];
    (
        [horiz(paths[0], v.x, a.x), horiz(paths[1], v.y, a.y), vertical],
        switch_rates,
    )
}

/// Runs the coupled kinematics → rheology → force simulation.
///
/// `params_h` drives `sigma_x` and `sigma_y`, `params_v` drives `sigma_z`;
/// each parameter set carries its own characteristic length.
pub fn simulate(
    shape: &FootShape,
    profile: &MotionProfile,
    params_v: &MudDirectionalParams,
    params_h: &MudDirectionalParams,
    options: &SimulationOptions,
) -> Result<ForceTrace> {
    shape.validate()?;
    profile.validate()?;
    params_v.validate()?;
    params_h.validate()?;
    let dt = profile.dt;
    let limit = params_v.max_stable_dt().min(params_h.max_stable_dt());
    if dt > limit * (1.0 + 1e-9) {
        return Err(MudError::StepSize { dt, limit });
    }
    if let (ForceModel::Mesh { resolution }, _) = (options.force_model, ()) {
        if resolution < 8 {
            return Err(MudError::Geometry(format!(
                "mesh resolution must be >= 8, got {resolution}"
            )));
        }
        if matches!(shape, FootShape::VariableAreaFlat(_)) {
            return Err(MudError::Geometry(
                "a variable-area foot has no surface to mesh".into(),
            ));
        }
    }
    if let (ForceModel::ClosedForm, FootShape::Mesh(_)) = (options.force_model, shape) {
        return Err(MudError::Geometry(
            "a user mesh has no closed form; use mesh integration".into(),
        ));
    }

    let (lc_h, lc_v) = (params_h.l_c, params_v.l_c);
    let params = [params_h, params_h, params_v];
    let fresh = || Axis {
        state: RheologyState::zero(),
        path: 0.0,
    };
    let mut axes = [fresh(), fresh(), fresh()];
    let mut samples = Vec::with_capacity(profile.len());

    for k in 0..profile.len() {
        if k > 0 && options.reset_per_cycle && profile.cycle[k] != profile.cycle[k - 1] {
            axes = [fresh(), fresh(), fresh()];
        }
        let paths = [axes[0].path, axes[1].path];
        let (drive, switch) = drives(profile, k, paths, lc_h, lc_v);

        let mut parts = [StressParts::default(); 3];
        for i in 0..3 {
            let p = params[i];
            let mut sp = axes[i].state.stress(drive[i].gamma, drive[i].gamma_dot, p);
            sp.switch = heaviside_smooth(switch[i], p.nu);
            sp.total = sp.immediate + sp.thixotropic + sp.switch * sp.suction;
            parts[i] = sp;
        }
        let stresses = DirectionalStresses::new(parts[0].total, parts[1].total, parts[2].total);

        let pos = profile.position[k];
        let vel = profile.velocity[k];
        let depth = (-pos.z).max(0.0);
        let force = if pos.z > 0.0 {
            ResultantForce::default()
        } else {
            match options.force_model {
                ForceModel::ClosedForm => {
                    let varphi = heading(&Vector2::new(vel.x, vel.y));
                    let area = match shape {
                        FootShape::VariableAreaFlat(s) => {
                            Some(s.area(depth, profile.time[k], axes[2].state.retracting))
                        }
                        _ => None,
                    };
                    closed_form_force(shape, depth, varphi, area, &stresses)?
                }
                ForceModel::Mesh { resolution } => {
                    integrate_mesh(shape, depth, &vel, &stresses, resolution)?
                }
            }
        };

        samples.push(TraceSample {
            t: profile.time[k],
            position: pos,
            velocity: vel,
            force,
            stresses,
            parts,
            depth,
            gamma: [drive[0].gamma, drive[1].gamma, drive[2].gamma],
            gamma_dot: [drive[0].gamma_dot, drive[1].gamma_dot, drive[2].gamma_dot],
            phase: profile.phase[k],
            cycle: profile.cycle[k],
        });

        if k + 1 == profile.len() {
            break;
        }
        // advance the horizontal slide paths while in the mud
        let next = profile.position[k + 1];
        if depth > 0.0 || next.z < 0.0 {
            axes[0].path += (next.x - pos.x).abs();
            axes[1].path += (next.y - pos.y).abs();
        }
        let next_paths = [axes[0].path, axes[1].path];
        let (drive_next, _) = drives(profile, k + 1, next_paths, lc_h, lc_v);
        for i in 0..3 {
            axes[i].state = axes[i].state.step(&drive[i], &drive_next[i], dt, params[i])?;
        }
    }
    Ok(ForceTrace { dt, samples })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calibration::{builtin_params, Direction};
    use approx::assert_relative_eq;

    fn params(dir: Direction, l_c: f64) -> MudDirectionalParams {
        builtin_params(0.25, dir)
            .unwrap()
            .with_characteristic_length(l_c, crate::rheology::DEFAULT_REFERENCE_SPEED)
    }

    #[test]
    fn plate_protocol_kinematics() {
        let p = plate_protocol(0.05, 0.01, 2.0, 1e-3).unwrap();
        assert_relative_eq!(p.duration(), 12.0, max_relative = 1e-9);
        let peak = p.position.iter().map(|x| -x.z).fold(0.0, f64::max);
        assert!((peak - 0.05).abs() <= 1e-3 * 0.01 + 1e-12);
        for (ph, v) in p.phase.iter().zip(&p.velocity) {
            match ph {
                Phase::Dwell => assert_eq!(v.z, 0.0),
                Phase::Intrude => assert!(v.z < 0.0),
                Phase::Retract => assert!(v.z > 0.0),
                Phase::Swing => unreachable!(),
            }
        }
        assert!(plate_protocol(0.05, 0.01, 1e-3, 1e-3).is_err());
        assert!(plate_protocol(-0.05, 0.01, 1.0, 1e-3).is_err());
    }

    #[test]
    fn gait_peak_speed() {
        for v in [0.13, 0.2, 0.26] {
            let p = gait_profile(0.1, 0.02, v, 1e-3).unwrap();
            let peak = p.velocity.iter().map(|u| u.norm()).fold(0.0, f64::max);
            assert!((peak - v).abs() < 1e-6, "{peak}");
            let deepest = p.position.iter().map(|x| -x.z).fold(0.0, f64::max);
            assert_eq!(deepest, 0.02);
        }
    }

    #[test]
    fn gait_velocity_integrates_to_position() {
        let p = gait_profile(0.1, 0.02, 0.2, 1e-3).unwrap();
        let mut x = p.position[0];
        let mut worst: f64 = 0.0;
        for k in 1..p.len() {
            x += 0.5 * p.dt * (p.velocity[k - 1] + p.velocity[k]);
            worst = worst.max((x - p.position[k]).norm());
        }
        // trapezoid error is O(dt²) of the curvature
        assert!(worst < 0.02 * (PI / p.duration()).powi(2) * p.dt * p.dt * 10.0 + 1e-12, "{worst}");
    }

    #[test]
    fn zero_step_length_is_vertical() {
        let p = gait_profile(0.0, 0.02, 0.2, 1e-3).unwrap();
        assert!(p.position.iter().all(|x| x.x == 0.0 && x.y == 0.0));
        assert_eq!(p.position[0].z, 0.0);
        assert_eq!(p.position[p.len() - 1].z, 0.0);
        // no dwell beyond the single turning sample
        assert_eq!(p.phase.iter().filter(|&&ph| ph == Phase::Dwell).count(), 1);
    }

    #[test]
    fn rest_at_fixed_depth() {
        let pv = params(Direction::Vertical, 0.065);
        let ph = params(Direction::Horizontal, 0.065);
        let dt = pv.default_dt();
        let mut p = MotionProfile::empty(dt);
        for _ in 0..4000 {
            p.push(Vec3::new(0.0, 0.0, -0.02), Vec3::zeros(), Vec3::zeros(), Phase::Dwell, 0);
        }
        let shape = FootShape::Flat { length: 0.08, width: 0.065 };
        let tr = simulate(&shape, &p, &pv, &ph, &SimulationOptions::default()).unwrap();
        let sb = pv.alpha * (0.02f64 / pv.l_c).powf(pv.n);
        for s in &tr.samples {
            assert_relative_eq!(s.force.fz, 0.08 * 0.065 * sb, max_relative = 1e-12);
        }
    }

    #[test]
    fn guard_rejects_large_steps() {
        let pv = params(Direction::Vertical, 0.065);
        let ph = params(Direction::Horizontal, 0.065);
        let p = plate_protocol(0.02, 0.01, 1.0, 0.05).unwrap();
        let shape = FootShape::Flat { length: 0.08, width: 0.065 };
        let err = simulate(&shape, &p, &pv, &ph, &SimulationOptions::default()).unwrap_err();
        assert!(matches!(err, MudError::StepSize { .. }));
    }

    #[test]
    fn suction_stays_off_while_intruding() {
        let pv = params(Direction::Vertical, 0.065);
        let ph = params(Direction::Horizontal, 0.065);
        let p = gait_profile(0.1, 0.02, 0.2, pv.default_dt()).unwrap();
        let shape = FootShape::Flat { length: 0.08, width: 0.065 };
        let tr = simulate(&shape, &p, &pv, &ph, &SimulationOptions::default()).unwrap();
        for s in &tr.samples {
            if s.phase == Phase::Intrude {
                assert!((s.parts[2].switch * s.parts[2].suction).abs() < 1e-3 * pv.sigma_y);
            }
            assert!(s.parts[2].suction >= -pv.sigma_y);
        }
        assert!(tr.samples.iter().any(|s| s.parts[2].suction < -0.1 * pv.sigma_y));
    }

    #[test]
    fn multi_cycle_resets() {
        let pv = params(Direction::Vertical, 0.065);
        let ph = params(Direction::Horizontal, 0.065);
        let one = gait_profile(0.1, 0.02, 0.2, pv.default_dt()).unwrap();
        let many = one.repeat_with_swing(3, 0.3, 0.1, 0.03);
        many.validate().unwrap();
        assert_eq!(*many.cycle.last().unwrap(), 2);
        let shape = FootShape::Flat { length: 0.08, width: 0.065 };
        let a = simulate(&shape, &one, &pv, &ph, &SimulationOptions::default()).unwrap();
        let b = simulate(&shape, &many, &pv, &ph, &SimulationOptions::default()).unwrap();
        // with resets, the last cycle reproduces the single-cycle trace
        let last: Vec<_> = b.samples.iter().filter(|s| s.cycle == 2).collect();
        let tail = &a.samples[..];
        assert_eq!(last.len(), tail.len());
        for (x, y) in last.iter().zip(tail) {
            assert_relative_eq!(x.force.fz, y.force.fz, max_relative = 1e-9, epsilon = 1e-9);
        }
        // swing samples are out of the mud
        assert!(b.samples.iter().filter(|s| s.phase == Phase::Swing).all(|s| s.force.fz == 0.0));
    }

    #[test]
    fn csv_header_and_precision() {
        let pv = params(Direction::Vertical, 0.065);
        let ph = params(Direction::Horizontal, 0.065);
        let p = gait_profile(0.1, 0.02, 0.2, pv.default_dt()).unwrap();
        let shape = FootShape::SemiSphere { radius: 0.045 };
        let tr = simulate(&shape, &p, &pv, &ph, &SimulationOptions::default()).unwrap();
        let mut buf = Vec::new();
        tr.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next().unwrap(),
            "t,x,y,z,ux,uy,uz,Fx,Fy,Fz,sigma_x,sigma_y,sigma_z,phase"
        );
        let row = lines.nth(10).unwrap();
        let first = row.split(',').next().unwrap();
        let mantissa = first.split('e').next().unwrap();
        assert_eq!(mantissa.replace(['.', '-'], "").len(), 9);
    }
}
