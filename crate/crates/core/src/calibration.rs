//! Built-in parameter tables and identification of constitutive constants
//! from plate-intrusion records.
//!
//! The fits use the quasi-static surrogates of the constitutive law:
//!
//! * intrusion: `sigma ≈ alpha·gamma^n + eta_inf·gamma_dot`
//! * dwell: `sigma = plateau + A·exp(-(t - t0)/lambda)`
//! * retraction (sealed): `sigma ≈ -(1 - exp(-Δt/tau_build))·sigma_y + eta_inf·gamma_dot`
//!
//! and are run in the order viscosity → power law → relaxation → suction.

use std::io::{Read, Write};

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{MudError, Result};
use crate::lm::{self, LmOptions};
use crate::rheology::{MudDirectionalParams, DEFAULT_REFERENCE_SPEED};
use crate::trajectory::Phase;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Vertical,
    Horizontal,
}

/// Plate side used as the characteristic length of the tabulated constants.
pub const TABLE_CHARACTERISTIC_LENGTH: f64 = 0.065;

const MPA: f64 = 1e6;

// water content, α, n, λ, η_m, η_∞, γ̇_c, τ_build, τ_leak, ε, σ_Y (stresses in MPa, viscosities in MPa·s)
const VERTICAL: [[f64; 11]; 3] = [
    [0.25, 0.024, 0.53, 1.9, 0.067, 0.014, 0.14, 0.32, 0.17, 0.016, 0.0071],
    [0.35, 0.013, 0.20, 3.2, 0.27, 0.0031, 0.042, 0.49, 0.089, 0.054, 0.011],
    [0.45, 0.010, 0.18, 2.6, 0.31, 0.0026, 0.027, 0.58, 0.052, 0.040, 0.0086],
];
const HORIZONTAL: [[f64; 11]; 3] = [
    [0.25, 0.018, 0.12, 1.8, 0.46, 0.010, 0.31, 0.63, 0.99, 0.027, 0.013],
    [0.35, 0.011, 0.32, 17.0, 0.41, 0.021, 0.019, 0.25, 0.67, 0.14, 0.0094],
    [0.45, 0.0078, 0.95, 8.7, 0.63, 0.065, 0.028, 0.21, 0.022, 0.12, 0.0061],
];

fn from_row(r: &[f64; 11]) -> MudDirectionalParams {
    MudDirectionalParams {
        alpha: r[1] * MPA,
        n: r[2],
        lambda: r[3],
        eta_m: r[4] * MPA,
        eta_inf: r[5] * MPA,
        gamma_dot_c: r[6],
        tau_build: r[7],
        tau_leak: r[8],
        epsilon: r[9],
        sigma_y: r[10] * MPA,
        l_c: 1.0,
        nu: 1.0,
        k_r: 1.0,
    }
    .with_characteristic_length(TABLE_CHARACTERISTIC_LENGTH, DEFAULT_REFERENCE_SPEED)
}

/// Result of a table lookup.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TableLookup {
    pub params: MudDirectionalParams,
    /// The water content fell between two rows and was linearly interpolated.
    pub interpolated: bool,
}

/// Tabulated constants for a water content in `[0.25, 0.45]`.
pub fn builtin_lookup(water_content: f64, direction: Direction) -> Result<TableLookup> {
    let table = match direction {
        Direction::Vertical => &VERTICAL,
        Direction::Horizontal => &HORIZONTAL,
    };
    if !(0.25 - 1e-9..=0.45 + 1e-9).contains(&water_content) {
        return Err(MudError::invalid(
            "water_content",
            format!(
                "{water_content} is outside the tabulated range 0.25–0.45; \
                 supply a parameter file for other mud"
            ),
        ));
    }
    if let Some(row) = table.iter().find(|r| (r[0] - water_content).abs() < 1e-9) {
        return Ok(TableLookup {
            params: from_row(row),
            interpolated: false,
        });
    }
    let i = table.iter().position(|r| r[0] > water_content).unwrap_or(2).max(1);
    let (a, b) = (&table[i - 1], &table[i]);
    let w = (water_content - a[0]) / (b[0] - a[0]);
    let mut row = [0.0; 11];
    for k in 0..11 {
        row[k] = a[k] + w * (b[k] - a[k]);
    }
    Ok(TableLookup {
        params: from_row(&row),
        interpolated: true,
    })
}

/// Tabulated constants (SI units) with the default characteristic length.
pub fn builtin_params(water_content: f64, direction: Direction) -> Result<MudDirectionalParams> {
    builtin_lookup(water_content, direction).map(|l| l.params)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RecordSample {
    pub t: f64,
    /// Penetration depth, m (positive into the mud).
    pub disp: f64,
    /// Penetration rate, m/s (positive into the mud).
    pub rate: f64,
    pub stress: f64,
    pub phase: Phase,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IntrusionRecord {
    pub direction: Direction,
    pub water_content: Option<f64>,
    /// Plate characteristic length, m.
    pub l_c: f64,
    pub samples: Vec<RecordSample>,
}

impl IntrusionRecord {
    pub fn validate(&self) -> Result<()> {
        if !(self.l_c > 0.0) {
            return Err(MudError::Calibration("record characteristic length must be > 0".into()));
        }
        if self.samples.windows(2).any(|w| !(w[1].t > w[0].t)) {
            return Err(MudError::Calibration("record time must increase strictly".into()));
        }
        Ok(())
    }

    fn branch(&self, phase: Phase) -> Vec<RecordSample> {
        self.samples.iter().copied().filter(|s| s.phase == phase).collect()
    }

    pub fn read_csv<R: Read>(reader: R, direction: Direction, l_c: f64) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(reader);
        let headers = rdr.headers()?.clone();
        let expected = ["t", "disp", "rate", "stress", "phase"];
        if headers.iter().map(str::trim).ne(expected.iter().copied()) {
            return Err(MudError::Calibration(format!(
                "record header must be `{}`, found `{}`",
                expected.join(","),
                headers.iter().collect::<Vec<_>>().join(",")
            )));
        }
        let samples = rdr.deserialize().collect::<std::result::Result<Vec<RecordSample>, _>>()?;
        let rec = IntrusionRecord {
            direction,
            water_content: None,
            l_c,
            samples,
        };
        rec.validate()?;
        Ok(rec)
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["t", "disp", "rate", "stress", "phase"])?;
        for s in &self.samples {
            out.write_record([
                format!("{:.8e}", s.t),
                format!("{:.8e}", s.disp),
                format!("{:.8e}", s.rate),
                format!("{:.8e}", s.stress),
                s.phase.to_string(),
            ])?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Plate protocol used to synthesize records.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyntheticProtocol {
    pub depth: f64,
    pub speed: f64,
    pub dwell: f64,
    pub dt: f64,
    pub l_c: f64,
}

impl Default for SyntheticProtocol {
    fn default() -> Self {
        Self {
            depth: 0.05,
            speed: 0.02,
            dwell: 10.0,
            dt: 2e-3,
            l_c: TABLE_CHARACTERISTIC_LENGTH,
        }
    }
}

/// Record generated from the calibration surrogates, optionally with
/// multiplicative Gaussian noise `stress·(1 + N(0, rel_noise))`.
pub fn synthetic_record(
    params: &MudDirectionalParams,
    direction: Direction,
    protocol: &SyntheticProtocol,
    noise: Option<(f64, u64)>,
) -> IntrusionRecord {
    let SyntheticProtocol {
        depth,
        speed,
        dwell,
        dt,
        l_c,
    } = *protocol;
    let t_in = depth / speed;
    let t_out = t_in + dwell;
    let total = t_out + t_in;
    let n = (total / dt).round() as usize;
    let rate_in = speed / l_c;
    let plateau = params.alpha * (depth / l_c).powf(params.n);
    let mut rng = noise.map(|(_, seed)| ChaCha8Rng::seed_from_u64(seed));
    let normal = noise.map(|(rel, _)| Normal::new(0.0, rel).expect("finite noise level"));
    let mut samples = Vec::with_capacity(n + 1);
    for k in 0..=n {
        let t = k as f64 * dt;
        let eps = 1e-9 * dt;
        let (disp, rate, stress, phase) = if t < t_in - eps {
            let d = speed * t;
            let s = params.alpha * (d / l_c).powf(params.n) + params.eta_inf * rate_in;
            (d, speed, s, Phase::Intrude)
        } else if t < t_out - eps {
            let s = plateau + params.eta_inf * rate_in * (-(t - t_in) / params.lambda).exp();
            (depth, 0.0, s, Phase::Dwell)
        } else {
            let d = (depth - speed * (t - t_out)).max(0.0);
            let s = (-(t - t_out) / params.tau_build).exp_m1() * params.sigma_y
                - params.eta_inf * rate_in;
            (d, -speed, s, Phase::Retract)
        };
        let stress = match (&mut rng, &normal) {
            (Some(r), Some(nd)) => stress * (1.0 + nd.sample(r)),
            _ => stress,
        };
        samples.push(RecordSample {
            t,
            disp,
            rate,
            stress,
            phase,
        });
    }
    IntrusionRecord {
        direction,
        water_content: None,
        l_c,
        samples,
    }
}

/// One identified quantity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitEntry {
    pub name: String,
    pub value: f64,
    /// Standard-error proxy from the Gauss–Newton normal matrix.
    pub std_error: f64,
    /// RMS residual of the sub-fit that produced this value, Pa.
    pub residual_rms: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub entries: Vec<FitEntry>,
    pub warnings: Vec<String>,
    /// RMS residual over all sub-fits, Pa.
    pub rmse: f64,
}

impl FitReport {
    pub fn get(&self, name: &str) -> Option<f64> {
        self.entries.iter().find(|e| e.name == name).map(|e| e.value)
    }

    fn push(&mut self, name: &str, value: f64, std_error: f64, residual_rms: f64) {
        self.entries.push(FitEntry {
            name: name.to_string(),
            value,
            std_error,
            residual_rms,
        });
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerLawFit {
    pub alpha: f64,
    pub n: f64,
    /// The exponent hit a bound and was pinned there.
    pub pinned: bool,
    pub std_error_alpha: f64,
    pub std_error_n: f64,
    pub residual_rms: f64,
}

pub const N_BOUNDS: (f64, f64) = (1e-3, 0.999);

/// Log–log regression of `sigma - eta_inf·gamma_dot` against `gamma` on the intrusion branch.
pub fn fit_power_law(record: &IntrusionRecord, eta_inf: f64) -> Result<PowerLawFit> {
    let pts: Vec<(f64, f64)> = record
        .branch(Phase::Intrude)
        .iter()
        .filter(|s| s.disp > 0.0)
        .map(|s| (s.disp / record.l_c, s.stress - eta_inf * s.rate / record.l_c))
        .collect();
    if pts.len() < 10 {
        return Err(MudError::Calibration(format!(
            "power-law fit needs >= 10 submerged intrusion samples, found {}",
            pts.len()
        )));
    }
    if let Some((g, s)) = pts.iter().find(|p| !(p.1 > 0.0)) {
        return Err(MudError::Calibration(format!(
            "viscosity-corrected stress is {s} Pa at gamma = {g}; \
             check the viscosity estimate or the record sign convention"
        )));
    }
    let xs: Vec<f64> = pts.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = pts.iter().map(|p| p.1.ln()).collect();
    let m = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / m, ys.iter().sum::<f64>() / m);
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx <= 0.0 {
        return Err(MudError::Calibration("intrusion branch has a single depth".into()));
    }
    let raw = sxy / sxx;
    let n = raw.clamp(N_BOUNDS.0, N_BOUNDS.1);
    let pinned = n != raw;
    let ln_a = my - n * mx;
    let alpha = ln_a.exp();
    let ssr: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - ln_a - n * x).powi(2)).sum();
    let s2 = ssr / (m - 2.0).max(1.0);
    let residual_rms = (pts
        .iter()
        .map(|(g, s)| (s - alpha * g.powf(n)).powi(2))
        .sum::<f64>()
        / m)
        .sqrt();
    Ok(PowerLawFit {
        alpha,
        n,
        pinned,
        std_error_alpha: alpha * (s2 * (1.0 / m + mx * mx / sxx)).sqrt(),
        std_error_n: (s2 / sxx).sqrt(),
        residual_rms,
    })
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Local quadratic estimate of the stress at `gamma` from samples within `half` of it.
fn local_stress(pts: &[(f64, f64)], gamma: f64, half: f64) -> Option<f64> {
    let win: Vec<_> = pts.iter().filter(|p| (p.0 - gamma).abs() <= half).collect();
    if win.len() < 5 {
        return None;
    }
    let a = DMatrix::from_fn(win.len(), 3, |i, j| (win[i].0 - gamma).powi(j as i32));
    let b = DVector::from_iterator(win.len(), win.iter().map(|p| p.1));
    let sol = a.svd(true, true).solve(&b, 1e-14).ok()?;
    Some(sol[0])
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ViscosityFit {
    pub eta_inf: f64,
    pub std_error: f64,
    pub residual_rms: f64,
    pub speeds: usize,
}

/// Slope of the intrusion stress against rate at matched depth across records.
pub fn fit_viscosity(records: &[IntrusionRecord]) -> Result<ViscosityFit> {
    let mut per_record = Vec::new();
    for r in records {
        let intr = r.branch(Phase::Intrude);
        if intr.len() < 10 {
            continue;
        }
        let rate = median(intr.iter().map(|s| s.rate / r.l_c).collect());
        let pts: Vec<(f64, f64)> = intr
            .iter()
            .filter(|s| s.disp > 0.0)
            .map(|s| (s.disp / r.l_c, s.stress))
            .collect();
        if pts.len() >= 10 {
            per_record.push((rate, pts));
        }
    }
    let mut rates: Vec<f64> = per_record.iter().map(|p| p.0).collect();
    rates.sort_by(f64::total_cmp);
    rates.dedup_by(|a, b| (*a - *b).abs() <= 1e-9 * b.abs().max(1e-12));
    if rates.len() < 2 {
        return Err(MudError::Calibration(
            "viscosity is unidentifiable: records need at least two distinct intrusion speeds"
                .into(),
        ));
    }
    let lo = per_record
        .iter()
        .map(|p| p.1.iter().map(|q| q.0).fold(f64::INFINITY, f64::min))
        .fold(f64::NEG_INFINITY, f64::max);
    let hi = per_record
        .iter()
        .map(|p| p.1.iter().map(|q| q.0).fold(f64::NEG_INFINITY, f64::max))
        .fold(f64::INFINITY, f64::min);
    if !(hi > lo) {
        return Err(MudError::Calibration("records share no common depth range".into()));
    }
    let half = 0.05 * (hi - lo);
    let levels = 10;
    // common slope with one intercept per depth level
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut groups = Vec::new();
    for l in 0..levels {
        let g = lo + half + (hi - lo - 2.0 * half) * (l as f64 + 0.5) / levels as f64;
        let mut row = Vec::new();
        for (rate, pts) in &per_record {
            if let Some(s) = local_stress(pts, g, half) {
                row.push((*rate, s));
            }
        }
        if row.len() >= 2 {
            let mr = row.iter().map(|p| p.0).sum::<f64>() / row.len() as f64;
            let ms = row.iter().map(|p| p.1).sum::<f64>() / row.len() as f64;
            for (r, s) in &row {
                xs.push(r - mr);
                ys.push(s - ms);
            }
            groups.push(row.len());
        }
    }
    let sxx: f64 = xs.iter().map(|x| x * x).sum();
    if groups.is_empty() || sxx <= 0.0 {
        return Err(MudError::Calibration("no matched depths across speeds".into()));
    }
    let slope = xs.iter().zip(&ys).map(|(x, y)| x * y).sum::<f64>() / sxx;
    let ssr: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - slope * x).powi(2)).sum();
    let dof = (xs.len() - groups.len()).saturating_sub(1).max(1) as f64;
    Ok(ViscosityFit {
        eta_inf: slope,
        std_error: (ssr / dof / sxx).sqrt(),
        residual_rms: (ssr / xs.len() as f64).sqrt(),
        speeds: rates.len(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct RelaxationFit {
    /// `None` when the dwell is flat and the time constant is unidentifiable.
    pub lambda: Option<f64>,
    pub plateau: f64,
    pub amplitude: f64,
    pub std_error: f64,
    pub residual_rms: f64,
    pub warnings: Vec<String>,
}

/// Exponential relaxation fit `plateau + A·exp(-(t - t0)/lambda)` on the dwell branch.
pub fn fit_relaxation(record: &IntrusionRecord) -> Result<RelaxationFit> {
    let dwell = record.branch(Phase::Dwell);
    if dwell.len() < 5 {
        return Err(MudError::Calibration(format!(
            "relaxation fit needs a dwell branch, found {} samples",
            dwell.len()
        )));
    }
    let t0 = dwell[0].t;
    let t: Vec<f64> = dwell.iter().map(|s| s.t - t0).collect();
    let y: Vec<f64> = dwell.iter().map(|s| s.stress).collect();
    let span = t[t.len() - 1];
    let scale = y.iter().map(|v| v.abs()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let spread = y.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
        - y.iter().cloned().fold(f64::INFINITY, f64::min);
    let mut warnings = Vec::new();
    if spread <= 1e-9 * scale {
        warnings.push("dwell stress is flat: relaxation time is unidentifiable".into());
        return Ok(RelaxationFit {
            lambda: None,
            plateau: y.iter().sum::<f64>() / y.len() as f64,
            amplitude: 0.0,
            std_error: f64::INFINITY,
            residual_rms: 0.0,
            warnings,
        });
    }

    let tail = (y.len() / 10).max(1);
    let p0 = y[y.len() - tail..].iter().sum::<f64>() / tail as f64;
    let a0 = y[0] - p0;
    let target = p0 + a0 / std::f64::consts::E;
    let l0 = t
        .iter()
        .zip(&y)
        .find(|(_, v)| (**v - target) * a0.signum() <= 0.0)
        .map(|(t, _)| *t)
        .filter(|t| *t > 0.0)
        .unwrap_or(span / 3.0);

    let model = |x: &DVector<f64>| {
        let (p, a, l) = (x[0], x[1], x[2]);
        let mut r = DVector::zeros(t.len());
        let mut j = DMatrix::zeros(t.len(), 3);
        for i in 0..t.len() {
            let e = (-t[i] / l).exp();
            r[i] = p + a * e - y[i];
            j[(i, 0)] = 1.0;
            j[(i, 1)] = e;
            j[(i, 2)] = a * e * t[i] / (l * l);
        }
        (r, j)
    };
    let res = lm::minimize(
        model,
        &[p0, a0, l0],
        &[f64::NEG_INFINITY, f64::NEG_INFINITY, 1e-6],
        &[f64::INFINITY, f64::INFINITY, 1e6],
        &LmOptions::default(),
    );
    let lambda = res.x[2];
    let amplitude = res.x[1];
    let rms = (res.cost / t.len() as f64).sqrt();

    if !res.converged {
        warnings.push("relaxation fit did not converge".into());
    }
    if span < 3.0 * lambda {
        warnings.push(format!(
            "dwell of {span:.3} s is shorter than 3·lambda = {:.3} s",
            3.0 * lambda
        ));
    }
    // monotonicity against the noise floor, on a moving average
    let k = (y.len() / 20).max(5).min(y.len());
    let smooth: Vec<f64> = y.windows(k).map(|w| w.iter().sum::<f64>() / k as f64).collect();
    let floor = 3.0 * rms / (k as f64).sqrt();
    let dir = amplitude.signum();
    if smooth.windows(2).any(|w| (w[0] - w[1]) * dir < -floor - 1e-12 * scale) {
        warnings.push("dwell stress is not monotone beyond the noise floor".into());
    }
    let unidentifiable = amplitude.abs() <= 3.0 * rms.max(1e-12 * scale) / (t.len() as f64).sqrt()
        || res.std_errors[2] > lambda;
    if unidentifiable {
        warnings.push("relaxation amplitude is below the noise: lambda unidentifiable".into());
    }
    Ok(RelaxationFit {
        lambda: (!unidentifiable).then_some(lambda),
        plateau: res.x[0],
        amplitude,
        std_error: res.std_errors[2],
        residual_rms: rms,
        warnings,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuctionFit {
    pub sigma_y: f64,
    pub tau_build: f64,
    pub std_error_sigma_y: f64,
    pub std_error_tau: f64,
    pub residual_rms: f64,
}

/// One-exponential suction fit on the retraction branch after removing `eta_inf·gamma_dot`.
pub fn fit_suction(record: &IntrusionRecord, eta_inf: f64) -> Result<SuctionFit> {
    let ret = record.branch(Phase::Retract);
    if ret.len() < 5 {
        return Err(MudError::Calibration(format!(
            "suction fit needs a retraction branch, found {} samples",
            ret.len()
        )));
    }
    let t0 = ret[0].t;
    let t: Vec<f64> = ret.iter().map(|s| s.t - t0).collect();
    let y: Vec<f64> = ret
        .iter()
        .map(|s| s.stress - eta_inf * s.rate / record.l_c)
        .collect();
    let min = y.iter().cloned().fold(f64::INFINITY, f64::min);
    if !(min < 0.0) {
        return Err(MudError::Calibration("no suction observed in the retraction branch".into()));
    }
    let s0 = -min;
    let tau0 = t
        .iter()
        .zip(&y)
        .find(|(_, v)| **v <= 0.632 * min)
        .map(|(t, _)| *t)
        .filter(|t| *t > 0.0)
        .unwrap_or(t[t.len() - 1] / 3.0);
    // the reversal happened somewhere between the previous sample and the first retraction sample
    let first = record.samples.iter().position(|s| s.phase == Phase::Retract).unwrap_or(0);
    let earliest = if first > 0 {
        record.samples[first - 1].t - t0
    } else {
        0.0
    };
    let model = |x: &DVector<f64>| {
        let (s, tau, onset) = (x[0], x[1], x[2]);
        let mut r = DVector::zeros(t.len());
        let mut j = DMatrix::zeros(t.len(), 3);
        for i in 0..t.len() {
            let age = t[i] - onset;
            let e = (-age / tau).exp();
            r[i] = -(1.0 - e) * s - y[i];
            j[(i, 0)] = -(1.0 - e);
            j[(i, 1)] = s * e * age / (tau * tau);
            j[(i, 2)] = s * e / tau;
        }
        (r, j)
    };
    let res = lm::minimize(
        model,
        &[s0, tau0, 0.5 * earliest],
        &[1e-9 * s0, 1e-6, earliest],
        &[f64::INFINITY, 1e6, 0.0],
        &LmOptions::default(),
    );
    Ok(SuctionFit {
        sigma_y: res.x[0],
        tau_build: res.x[1],
        std_error_sigma_y: res.std_errors[0],
        std_error_tau: res.std_errors[1],
        residual_rms: (res.cost / t.len() as f64).sqrt(),
    })
}

/// Parameters and report of a full calibration.
#[derive(Debug, Clone, PartialEq)]
pub struct Calibration {
    pub params: MudDirectionalParams,
    pub report: FitReport,
}

/// Runs all identifiable sub-fits and merges the results onto `base`
/// (which supplies `eta_m`, `gamma_dot_c`, `tau_leak`, `epsilon` and anything
/// the records cannot identify).
pub fn calibrate(records: &[IntrusionRecord], base: &MudDirectionalParams) -> Result<Calibration> {
    if records.is_empty() {
        return Err(MudError::Calibration("no records given".into()));
    }
    for r in records {
        r.validate()?;
    }
    let mut p = *base;
    let mut report = FitReport::default();
    let mut sq = Vec::new();

    match fit_viscosity(records) {
        Ok(v) => {
            p.eta_inf = v.eta_inf;
            report.push("eta_inf", v.eta_inf, v.std_error, v.residual_rms);
            sq.push(v.residual_rms);
        }
        Err(e) => report.warnings.push(format!("{e}; keeping eta_inf = {}", p.eta_inf)),
    }

    let main = &records[0];
    match fit_power_law(main, p.eta_inf) {
        Ok(f) => {
            p.alpha = f.alpha;
            p.n = f.n;
            if f.pinned {
                report.warnings.push(format!("exponent n pinned at its bound ({})", f.n));
            }
            report.push("alpha", f.alpha, f.std_error_alpha, f.residual_rms);
            report.push("n", f.n, f.std_error_n, f.residual_rms);
            sq.push(f.residual_rms);
        }
        Err(e) => report.warnings.push(format!("power law: {e}")),
    }

    match records.iter().find(|r| r.samples.iter().any(|s| s.phase == Phase::Dwell)) {
        Some(r) => match fit_relaxation(r) {
            Ok(f) => {
                report.warnings.extend(f.warnings.iter().cloned());
                if let Some(l) = f.lambda {
                    p.lambda = l;
                    report.push("lambda", l, f.std_error, f.residual_rms);
                }
                sq.push(f.residual_rms);
            }
            Err(e) => report.warnings.push(format!("relaxation: {e}")),
        },
        None => report.warnings.push("no dwell branch: lambda not fitted".into()),
    }

    match records.iter().find(|r| r.samples.iter().any(|s| s.phase == Phase::Retract)) {
        Some(r) => match fit_suction(r, p.eta_inf) {
            Ok(f) => {
                p.sigma_y = f.sigma_y;
                p.tau_build = f.tau_build;
                report.push("sigma_y", f.sigma_y, f.std_error_sigma_y, f.residual_rms);
                report.push("tau_build", f.tau_build, f.std_error_tau, f.residual_rms);
                sq.push(f.residual_rms);
            }
            Err(e) => report.warnings.push(format!("suction: {e}; suction parameters not fitted")),
        },
        None => report
            .warnings
            .push("no retraction branch: suction parameters not fitted".into()),
    }

    if p.eta_m <= p.eta_inf {
        report.warnings.push(format!(
            "fitted eta_inf ({}) is not below eta_m ({}); raising eta_m",
            p.eta_inf, p.eta_m
        ));
        p.eta_m = 1.01 * p.eta_inf;
    }
    report.rmse = (sq.iter().map(|r| r * r).sum::<f64>() / sq.len().max(1) as f64).sqrt();
    p = p.with_characteristic_length(p.l_c, DEFAULT_REFERENCE_SPEED);
    p.validate()?;
    Ok(Calibration { params: p, report })
}
