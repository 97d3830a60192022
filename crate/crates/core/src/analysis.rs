//! Trace-level metrics: impulse, suction, loop energy, normalized stress and
//! relative error between traces.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{MudError, Result};
use crate::force::cross_section_areas;
use crate::geometry::FootShape;
use crate::trajectory::{ForceTrace, Phase};

/// Trapezoidal integral of `f` over the abscissae `t`.
pub fn trapezoid(t: &[f64], f: &[f64]) -> f64 {
    t.windows(2)
        .zip(f.windows(2))
        .map(|(t, f)| 0.5 * (t[1] - t[0]) * (f[0] + f[1]))
        .sum()
}

/// `∫F dt` per axis, N·s.
pub fn impulse(trace: &ForceTrace) -> [f64; 3] {
    let t = trace.times();
    [0, 1, 2].map(|i| trapezoid(&t, &trace.force(i)))
}

/// Magnitude of the most negative vertical force, N.
pub fn max_suction(trace: &ForceTrace) -> f64 {
    trace
        .samples
        .iter()
        .map(|s| -s.force.fz)
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LoopEnergy {
    /// Dissipated work, J (magnitude of the loop integral).
    pub energy: f64,
    /// Signed `∮F dz` with `z` the depth; positive for a dissipative loop.
    pub signed: f64,
    /// `|depth_end - depth_start|` when the loop does not close.
    pub gap: Option<f64>,
}

/// `∮F dz` over a force–depth curve.
pub fn loop_energy(depth: &[f64], force: &[f64]) -> LoopEnergy {
    let signed = trapezoid(depth, force);
    let gap = match (depth.first(), depth.last()) {
        (Some(a), Some(b)) => {
            let scale = depth.iter().fold(0.0f64, |m, d| m.max(d.abs()));
            let g = (b - a).abs();
            (g > 1e-9 + 1e-6 * scale).then_some(g)
        }
        _ => None,
    };
    LoopEnergy {
        energy: signed.abs(),
        signed,
        gap,
    }
}

/// Vertical force–depth loop energy of a trace.
pub fn hysteresis_energy(trace: &ForceTrace) -> LoopEnergy {
    loop_energy(&trace.depths(), &trace.force(2))
}

/// Root-mean-square difference over the reference peak-to-peak amplitude.
pub fn relative_rmse_series(predicted: &[f64], reference: &[f64]) -> Result<f64> {
    if predicted.len() != reference.len() || reference.is_empty() {
        return Err(MudError::Analysis(format!(
            "series lengths differ ({} vs {})",
            predicted.len(),
            reference.len()
        )));
    }
    let hi = reference.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lo = reference.iter().cloned().fold(f64::INFINITY, f64::min);
    let amp = hi - lo;
    if !(amp > 0.0) {
        return Err(MudError::Analysis("reference amplitude is zero".into()));
    }
    let ms = predicted
        .iter()
        .zip(reference)
        .map(|(p, r)| (p - r).powi(2))
        .sum::<f64>()
        / reference.len() as f64;
    Ok(ms.sqrt() / amp)
}

/// Per-axis relative RMSE of `predicted` against `reference` on the same grid.
///
/// An axis on which both traces are identically zero has no amplitude and is
/// reported as `None`; a zero-amplitude reference against a nonzero
/// prediction is an error, as is a reference that is flat on every axis.
pub fn relative_rmse(predicted: &ForceTrace, reference: &ForceTrace) -> Result<[Option<f64>; 3]> {
    if predicted.len() != reference.len() {
        return Err(MudError::Analysis(format!(
            "traces have different lengths ({} vs {}); resample first",
            predicted.len(),
            reference.len()
        )));
    }
    let tol = 1e-9 * reference.dt.max(f64::MIN_POSITIVE);
    if predicted
        .samples
        .iter()
        .zip(&reference.samples)
        .any(|(a, b)| (a.t - b.t).abs() > tol.max(1e-12 * b.t.abs()))
    {
        return Err(MudError::Analysis("traces are on different time grids".into()));
    }
    let mut out = [None; 3];
    for (i, slot) in out.iter_mut().enumerate() {
        let p = predicted.force(i);
        let r = reference.force(i);
        let flat = r.iter().all(|v| *v == r[0]);
        if flat && p.iter().zip(&r).all(|(a, b)| a == b) {
            continue;
        }
        *slot = Some(relative_rmse_series(&p, &r)?);
    }
    if out.iter().all(Option::is_none) {
        return Err(MudError::Analysis("reference amplitude is zero on every axis".into()));
    }
    Ok(out)
}

/// Linear resampling of `values` given at `t` onto `grid` (clamped at the ends).
pub fn resample(t: &[f64], values: &[f64], grid: &[f64]) -> Vec<f64> {
    grid.iter()
        .map(|&g| {
            let j = t.partition_point(|x| *x <= g);
            if j == 0 {
                values[0]
            } else if j >= t.len() {
                values[t.len() - 1]
            } else {
                let w = (g - t[j - 1]) / (t[j] - t[j - 1]);
                values[j - 1] + w * (values[j] - values[j - 1])
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedStress {
    pub t: Vec<f64>,
    /// `F_i / A_i` per axis, Pa; zero where masked.
    pub stress: Vec<[f64; 3]>,
    /// `false` where the cross-section area vanished and the sample was skipped.
    pub valid: Vec<[bool; 3]>,
}

impl NormalizedStress {
    /// Largest valid value on `axis` among samples of `phase`.
    pub fn peak(&self, axis: usize, phases: &[Phase], trace: &ForceTrace) -> Option<f64> {
        self.stress
            .iter()
            .zip(&self.valid)
            .zip(&trace.samples)
            .filter(|((_, ok), s)| ok[axis] && phases.contains(&s.phase))
            .map(|((v, _), _)| v[axis])
            .reduce(f64::max)
    }
}

/// Divides each force component by the matching cross-section area of `shape`
/// at the sample depth.
pub fn normalize_stress(trace: &ForceTrace, shape: &FootShape) -> NormalizedStress {
    let mut out = NormalizedStress {
        t: trace.times(),
        stress: Vec::with_capacity(trace.len()),
        valid: Vec::with_capacity(trace.len()),
    };
    for s in &trace.samples {
        let mut areas = cross_section_areas(shape, s.depth);
        if let FootShape::VariableAreaFlat(_) = shape {
            areas[2] = s.force.effective_area;
        }
        let f = s.force.as_array();
        let mut v = [0.0; 3];
        let mut ok = [false; 3];
        for i in 0..3 {
            if areas[i] > 0.0 {
                v[i] = f[i] / areas[i];
                ok[i] = true;
            }
        }
        out.stress.push(v);
        out.valid.push(ok);
    }
    out
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct GaitMetrics {
    /// N·s per axis.
    pub impulse: [f64; 3],
    /// N, stored as a magnitude.
    pub max_suction: f64,
    /// J.
    pub hysteresis_energy: f64,
    /// Largest upward vertical force, N.
    pub peak_support: f64,
    /// Deepest point reached, m.
    pub sinking_depth: f64,
    pub warnings: Vec<String>,
}

pub fn gait_metrics(trace: &ForceTrace) -> GaitMetrics {
    let loop_e = hysteresis_energy(trace);
    let mut warnings = Vec::new();
    if let Some(g) = loop_e.gap {
        warnings.push(format!("force–depth loop is open by {g:.3e} m"));
    }
    GaitMetrics {
        impulse: impulse(trace),
        max_suction: max_suction(trace),
        hysteresis_energy: loop_e.energy,
        peak_support: trace.samples.iter().map(|s| s.force.fz).fold(0.0, f64::max),
        sinking_depth: trace.samples.iter().map(|s| s.depth).fold(0.0, f64::max),
        warnings,
    }
}

/// One row of a scenario comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub label: String,
    /// Peak vertical force over effective area during intrusion, Pa.
    pub peak_normalized_stress: f64,
    /// Peak immediate vertical stress, Pa.
    pub peak_sigma_b: f64,
    /// Peak total vertical stress, Pa.
    pub peak_sigma_z: f64,
    pub metrics: GaitMetrics,
}

pub fn comparison_row(label: &str, shape: &FootShape, trace: &ForceTrace) -> ComparisonRow {
    let norm = normalize_stress(trace, shape);
    ComparisonRow {
        label: label.to_string(),
        peak_normalized_stress: norm
            .peak(2, &[Phase::Intrude, Phase::Dwell], trace)
            .unwrap_or(0.0),
        peak_sigma_b: trace
            .samples
            .iter()
            .map(|s| s.parts[2].immediate)
            .fold(0.0, f64::max),
        peak_sigma_z: trace
            .samples
            .iter()
            .map(|s| s.stresses.sigma_z)
            .fold(0.0, f64::max),
        metrics: gait_metrics(trace),
    }
}

pub fn write_comparison_csv<W: Write>(rows: &[ComparisonRow], w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record([
        "label",
        "peak_normalized_stress_pa",
        "peak_sigma_b_pa",
        "peak_sigma_z_pa",
        "max_suction_n",
        "impulse_x_ns",
        "impulse_y_ns",
        "impulse_z_ns",
        "hysteresis_energy_j",
        "peak_support_n",
        "sinking_depth_m",
    ])?;
    for r in rows {
        let m = &r.metrics;
        let mut row = vec![r.label.clone()];
        row.extend(
            [
                r.peak_normalized_stress,
                r.peak_sigma_b,
                r.peak_sigma_z,
                m.max_suction,
                m.impulse[0],
                m.impulse[1],
                m.impulse[2],
                m.hysteresis_energy,
                m.peak_support,
                m.sinking_depth,
            ]
            .iter()
            .map(|v| format!("{v:.8e}")),
        );
        out.write_record(&row)?;
    }
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::force::{DirectionalStresses, ResultantForce};
    use crate::rheology::StressParts;
    use crate::trajectory::TraceSample;
    use crate::geometry::Vec3;
    use approx::assert_relative_eq;

    fn synthetic(t: &[f64], depth: &[f64], fz: &[f64]) -> ForceTrace {
        let samples = t
            .iter()
            .zip(depth)
            .zip(fz)
            .map(|((&t, &d), &f)| TraceSample {
                t,
                position: Vec3::new(0.0, 0.0, -d),
                velocity: Vec3::zeros(),
                force: ResultantForce {
                    fx: 0.5 * f,
                    fz: f,
                    ..Default::default()
                },
                stresses: DirectionalStresses::default(),
                parts: [StressParts::default(); 3],
                depth: d,
                gamma: [0.0; 3],
                gamma_dot: [0.0; 3],
                phase: Phase::Intrude,
                cycle: 0,
            })
            .collect();
        ForceTrace {
            dt: t.get(1).copied().unwrap_or(1.0) - t[0],
            samples,
        }
    }

    #[test]
    fn constant_force_impulse() {
        let t: Vec<f64> = (0..=200).map(|k| k as f64 * 0.01).collect();
        let tr = synthetic(&t, &vec![0.0; t.len()], &vec![10.0; t.len()]);
        let i = impulse(&tr);
        assert_relative_eq!(i[2], 20.0, max_relative = 1e-12);
        assert_relative_eq!(i[0], 10.0, max_relative = 1e-12);
        assert_eq!(i[1], 0.0);
    }

    #[test]
    fn antisymmetric_impulse_vanishes() {
        let t: Vec<f64> = (0..=100).map(|k| k as f64 * 0.01).collect();
        let f: Vec<f64> = t.iter().map(|t| (2.0 * std::f64::consts::PI * t).sin()).collect();
        let tr = synthetic(&t, &vec![0.0; t.len()], &f);
        assert!(impulse(&tr)[2].abs() < 1e-12);
    }

    #[test]
    fn suction_is_a_magnitude() {
        let t = [0.0, 1.0, 2.0];
        assert_eq!(max_suction(&synthetic(&t, &[0.0; 3], &[1.0, 2.0, 3.0])), 0.0);
        assert_eq!(max_suction(&synthetic(&t, &[0.0; 3], &[1.0, -4.0, 3.0])), 4.0);
    }

    #[test]
    fn rectangle_loop_area() {
        // load at 10 N down to 5 cm, unload at 0 N
        let depth = [0.0, 0.05, 0.05, 0.0, 0.0];
        let force = [10.0, 10.0, 0.0, 0.0, 10.0];
        let e = loop_energy(&depth, &force);
        assert_relative_eq!(e.energy, 0.5, max_relative = 1e-12);
        assert!(e.signed > 0.0);
        assert!(e.gap.is_none());
    }

    #[test]
    fn reversible_loop_has_no_area() {
        let down: Vec<f64> = (0..=50).map(|k| k as f64 * 1e-3).collect();
        let mut depth = down.clone();
        depth.extend(down.iter().rev());
        let force: Vec<f64> = depth.iter().map(|d| 3e4 * d.powf(0.6)).collect();
        assert!(loop_energy(&depth, &force).energy < 1e-12);
    }

    #[test]
    fn open_loop_reports_gap() {
        let e = loop_energy(&[0.0, 0.05, 0.02], &[0.0, 1.0, 0.0]);
        assert_relative_eq!(e.gap.unwrap(), 0.02);
    }

    #[test]
    fn loop_energy_is_reparametrization_invariant() {
        let path = |s: f64| 0.04 * (std::f64::consts::PI * s).sin();
        let force = |s: f64, d: f64| if s < 0.5 { 2e3 * d + 5.0 } else { 2e3 * d - 5.0 };
        let run = |warp: &dyn Fn(f64) -> f64, n: usize| {
            let s: Vec<f64> = (0..=n).map(|k| warp(k as f64 / n as f64)).collect();
            let d: Vec<f64> = s.iter().map(|s| path(*s)).collect();
            let f: Vec<f64> = s.iter().zip(&d).map(|(s, d)| force(*s, *d)).collect();
            loop_energy(&d, &f).energy
        };
        let a = run(&|s| s, 2000);
        let b = run(&|s| s * s * (3.0 - 2.0 * s), 2000);
        assert_relative_eq!(a, b, max_relative = 1e-2);
        assert_relative_eq!(a, 0.4, max_relative = 1e-2);
    }

    #[test]
    fn rmse_of_offset_trace() {
        let t: Vec<f64> = (0..=100).map(|k| k as f64 * 0.01).collect();
        let f: Vec<f64> = t.iter().map(|t| 100.0 * t).collect();
        let r = synthetic(&t, &vec![0.0; t.len()], &f);
        let shifted: Vec<f64> = f.iter().map(|v| v + 5.0).collect();
        let p = synthetic(&t, &vec![0.0; t.len()], &shifted);
        let e = relative_rmse(&p, &r).unwrap();
        assert_relative_eq!(e[2].unwrap(), 0.05, max_relative = 1e-12);
        assert!(e[1].is_none());
        assert_eq!(relative_rmse(&r, &r).unwrap()[2], Some(0.0));
    }

    #[test]
    fn rmse_rejects_flat_reference() {
        let t = [0.0, 1.0, 2.0];
        let r = synthetic(&t, &[0.0; 3], &[1.0; 3]);
        let p = synthetic(&t, &[0.0; 3], &[1.0, 2.0, 1.0]);
        assert!(relative_rmse(&p, &r).is_err());
        assert!(relative_rmse_series(&[1.0], &[1.0]).is_err());
    }

    #[test]
    fn flat_foot_normalization() {
        let shape = FootShape::Flat {
            length: 0.1,
            width: 0.05,
        };
        let tr = synthetic(&[0.0, 1.0], &[0.0, 0.02], &[5.0, 50.0]);
        let n = normalize_stress(&tr, &shape);
        assert_relative_eq!(n.stress[1][2], 50.0 / 0.005, max_relative = 1e-12);
        assert!(n.valid[0][2]);
        assert!(!n.valid[0][0]);
        assert_relative_eq!(n.stress[1][0], 25.0 / (0.1 * 0.02), max_relative = 1e-12);
    }

    #[test]
    fn sphere_normalization_uses_contact_disk() {
        let r = 0.045;
        let shape = FootShape::SemiSphere { radius: r };
        let z = 0.01;
        let tr = synthetic(&[0.0, 1.0], &[z, z], &[1.0, 1.0]);
        let n = normalize_stress(&tr, &shape);
        let theta = 2.0 * (z / (2.0 * r)).sqrt().asin();
        let disk = std::f64::consts::PI * r * r * theta.sin().powi(2);
        assert_relative_eq!(n.stress[0][2], 1.0 / disk, max_relative = 1e-12);
    }

    #[test]
    fn resample_is_linear() {
        let v = resample(&[0.0, 1.0, 2.0], &[0.0, 10.0, 0.0], &[-1.0, 0.5, 1.5, 3.0]);
        assert_eq!(v, vec![0.0, 5.0, 5.0, 0.0]);
    }
}
