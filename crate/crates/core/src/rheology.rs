//! Scalar mud constitutive law for one stress direction.
//!
//! The total stress on an intruder is the sum of an immediate (rate
//! independent) power-law response, a thixotropic stress driven by a
//! structural parameter `xi`, and a suction stress that only acts while the
//! intruder retracts:
//!
//! ```text
//! sigma_tot = alpha * gamma^n + sigma_th + H_nu(gamma_dot) * sigma_s
//! ```
//!
//! `gamma = depth / L_c` and `gamma_dot = velocity / L_c` are dimensionless.
//! All stresses are in Pa and all viscosities in Pa·s (the tabulated
//! "MPa/s" values are read as MPa·s, i.e. stress per unit dimensionless rate).

use serde::{Deserialize, Serialize};

use crate::error::{MudError, Result};

/// Reference walking speed used to derive `nu` and `k_r` when none is given.
pub const DEFAULT_REFERENCE_SPEED: f64 = 0.2;

/// Calibrated constitutive constants for one direction (vertical or horizontal).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MudDirectionalParams {
    #[serde(rename = "alpha_pa")]
    pub alpha: f64,
    pub n: f64,
    #[serde(rename = "lambda_s")]
    pub lambda: f64,
    #[serde(rename = "eta_m_pa_s")]
    pub eta_m: f64,
    #[serde(rename = "eta_inf_pa_s")]
    pub eta_inf: f64,
    #[serde(rename = "gamma_dot_c_per_s")]
    pub gamma_dot_c: f64,
    #[serde(rename = "tau_build_s")]
    pub tau_build: f64,
    #[serde(rename = "tau_leak_s")]
    pub tau_leak: f64,
    pub epsilon: f64,
    #[serde(rename = "sigma_y_pa")]
    pub sigma_y: f64,
    /// Characteristic length used to nondimensionalize depth and speed.
    #[serde(rename = "l_c_m")]
    pub l_c: f64,
    /// Width of the intrusion/retraction switch, in dimensionless rate units.
    #[serde(rename = "nu_per_s")]
    pub nu: f64,
    /// Rejuvenation constant; aging is `k_a = gamma_dot_c * k_r`.
    pub k_r: f64,
}

impl MudDirectionalParams {
    /// Re-derives `nu` and `k_r` for a new characteristic length.
    ///
    /// `nu` is set to 1% of the reference rate and `k_r` so that the
    /// structural time constant equals `lambda` at the reference rate.
    pub fn with_characteristic_length(mut self, l_c: f64, reference_speed: f64) -> Self {
        let reference_rate = reference_speed / l_c;
        self.l_c = l_c;
        self.nu = 0.01 * reference_rate;
        self.k_r = 1.0 / (self.lambda * (self.gamma_dot_c + reference_rate));
        self
    }

    pub fn k_a(&self) -> f64 {
        self.gamma_dot_c * self.k_r
    }

    /// `(eta_m - eta_inf) * gamma_dot_c`, the yield stress implied by the viscosities.
    pub fn derived_yield_stress(&self) -> f64 {
        (self.eta_m - self.eta_inf) * self.gamma_dot_c
    }

    /// Relative gap between the derived and the stored yield stress.
    pub fn yield_consistency(&self) -> f64 {
        (self.derived_yield_stress() - self.sigma_y).abs() / self.sigma_y
    }

    /// Largest step accepted by [`RheologyState::step`].
    pub fn max_stable_dt(&self) -> f64 {
        self.lambda.min(self.tau_build).min(self.tau_leak) / 10.0
    }

    pub fn default_dt(&self) -> f64 {
        self.lambda.min(self.tau_build).min(self.tau_leak) / 100.0
    }

    pub fn validate(&self) -> Result<()> {
        fn positive(name: &'static str, v: f64) -> Result<()> {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(MudError::invalid(name, format!("must be finite and > 0, got {v}")))
            }
        }
        positive("alpha", self.alpha)?;
        if !(self.n > 0.0 && self.n < 1.0) {
            return Err(MudError::invalid("n", format!("must lie in (0, 1), got {}", self.n)));
        }
        positive("lambda", self.lambda)?;
        positive("eta_inf", self.eta_inf)?;
        positive("eta_m", self.eta_m)?;
        if self.eta_m <= self.eta_inf {
            return Err(MudError::invalid(
                "eta_m",
                format!("must exceed eta_inf ({} <= {})", self.eta_m, self.eta_inf),
            ));
        }
        positive("gamma_dot_c", self.gamma_dot_c)?;
        positive("tau_build", self.tau_build)?;
        positive("tau_leak", self.tau_leak)?;
        positive("epsilon", self.epsilon)?;
        positive("sigma_y", self.sigma_y)?;
        positive("l_c", self.l_c)?;
        positive("nu", self.nu)?;
        positive("k_r", self.k_r)?;
        Ok(())
    }
}

/// Smooth intrusion/retraction switch: ≈0 while intruding, ≈1 while retracting.
pub fn heaviside_smooth(gamma_dot: f64, nu: f64) -> f64 {
    0.5 * (1.0 - (gamma_dot / nu).tanh())
}

/// Sealing state of the cavity under a retracting intruder (1 = sealed).
pub fn sealing_factor(gamma: f64, gamma_0: f64, epsilon: f64) -> f64 {
    0.5 * (1.0 - ((gamma - gamma_0) / epsilon).tanh())
}

/// Immediate resistive stress `alpha * gamma^n`.
pub fn immediate_stress(gamma: f64, params: &MudDirectionalParams) -> Result<f64> {
    if gamma < 0.0 || gamma.is_nan() {
        return Err(MudError::Domain(format!(
            "immediate stress needs gamma >= 0, got {gamma}"
        )));
    }
    Ok(params.alpha * gamma.powf(params.n))
}

/// Steady-state structural parameter at a constant rate.
pub fn xi_steady(gamma_dot: f64, params: &MudDirectionalParams) -> f64 {
    params.gamma_dot_c / (params.gamma_dot_c + gamma_dot.abs())
}

/// Time constant of the structural parameter at a constant rate.
pub fn tau_xi(gamma_dot: f64, params: &MudDirectionalParams) -> f64 {
    1.0 / (params.k_a() + params.k_r * gamma_dot.abs())
}

/// Steady-state thixotropic stress `(eta_inf + xi_ss * eta_m) * gamma_dot`.
pub fn thixo_steady(gamma_dot: f64, params: &MudDirectionalParams) -> f64 {
    (params.eta_inf + xi_steady(gamma_dot, params) * params.eta_m) * gamma_dot
}

/// Exact thixotropic stress for a constant rate from zero initial conditions
/// (`sigma_th = 0`, `xi = 0`), keeping both exponentials.
pub fn thixo_exact(t: f64, gamma_dot: f64, params: &MudDirectionalParams) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    let lambda = params.lambda;
    let tau = tau_xi(gamma_dot, params);
    let structural = xi_steady(gamma_dot, params) * params.eta_m * gamma_dot;
    let lead = -(-t / lambda).exp_m1() * thixo_steady(gamma_dot, params);
    // (e^{-t/λ} - e^{-t/τ}) τ/(τ-λ); tends to -(t/λ) e^{-t/λ} as τ → λ.
    let gap = tau - lambda;
    let lag = if gap.abs() <= 1e-9 * lambda {
        -(t / lambda) * (-t / lambda).exp()
    } else {
        ((-t / lambda).exp() - (-t / tau).exp()) * tau / gap
    };
    lead + lag * structural
}

/// First-order closed form `(1 - e^{-t/lambda}) * sigma_th_ss`.
pub fn thixo_closed_form(t: f64, gamma_dot: f64, params: &MudDirectionalParams) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    -(-t / params.lambda).exp_m1() * thixo_steady(gamma_dot, params)
}

/// Build/leak rate `a` and steady suction for a frozen sealing state.
pub fn suction_steady(gamma: f64, gamma_0: f64, params: &MudDirectionalParams) -> (f64, f64) {
    let phi = sealing_factor(gamma, gamma_0, params.epsilon);
    suction_steady_for(phi, params)
}

pub(crate) fn suction_steady_for(phi: f64, params: &MudDirectionalParams) -> (f64, f64) {
    let a = phi / params.tau_build + (1.0 - phi) / params.tau_leak;
    (a, -phi * params.sigma_y / (a * params.tau_build))
}

/// Suction stress `dt` seconds after retraction onset at a frozen `gamma`.
pub fn suction_closed_form(
    dt: f64,
    gamma: f64,
    gamma_0: f64,
    params: &MudDirectionalParams,
) -> f64 {
    if dt <= 0.0 {
        return 0.0;
    }
    let (a, steady) = suction_steady(gamma, gamma_0, params);
    -(-a * dt).exp_m1() * steady
}

/// Kinematic drive of one direction at one instant.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Drive {
    pub gamma: f64,
    pub gamma_dot: f64,
    pub gamma_ddot: f64,
}

impl Drive {
    pub fn new(gamma: f64, gamma_dot: f64, gamma_ddot: f64) -> Self {
        Self {
            gamma,
            gamma_dot,
            gamma_ddot,
        }
    }

    fn lerp(&self, other: &Drive, w: f64) -> Drive {
        Drive {
            gamma: self.gamma + w * (other.gamma - self.gamma),
            gamma_dot: self.gamma_dot + w * (other.gamma_dot - self.gamma_dot),
            gamma_ddot: self.gamma_ddot + w * (other.gamma_ddot - self.gamma_ddot),
        }
    }
}

/// Evolving internal state of one stress direction.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct RheologyState {
    pub sigma_th: f64,
    pub xi: f64,
    pub sigma_s: f64,
    /// Dimensionless displacement latched at retraction onset.
    pub gamma_0: f64,
    /// Retraction onset time.
    pub t_w: f64,
    pub retracting: bool,
    /// Set once the intruder has been below the surface.
    pub submerged: bool,
    /// Time of this state.
    pub time: f64,
}

#[derive(Clone, Copy)]
struct Vars {
    sigma_th: f64,
    xi: f64,
    sigma_s: f64,
}

impl Vars {
    fn axpy(self, h: f64, k: Vars) -> Vars {
        Vars {
            sigma_th: self.sigma_th + h * k.sigma_th,
            xi: self.xi + h * k.xi,
            sigma_s: self.sigma_s + h * k.sigma_s,
        }
    }
}

impl RheologyState {
    /// Undisturbed, stress-free state at `t = 0` with `xi = 0`.
    pub fn zero() -> Self {
        Self::default()
    }

    /// Right-hand side of the thixotropy and suction ODEs.
    fn rates(&self, v: Vars, d: &Drive, p: &MudDirectionalParams) -> Vars {
        let f_xi = (p.eta_inf + v.xi * p.eta_m) * d.gamma_dot + p.lambda * p.eta_inf * d.gamma_ddot;
        let d_sigma_th = (f_xi - v.sigma_th) / p.lambda;
        let d_xi = p.k_a() * (1.0 - v.xi) - p.k_r * d.gamma_dot.abs() * v.xi;
        let d_sigma_s = if self.retracting {
            // out of the mud the seal is gone and only leakage remains
            let phi = if d.gamma <= 0.0 {
                0.0
            } else {
                sealing_factor(d.gamma, self.gamma_0, p.epsilon)
            };
            -phi / p.tau_build * (v.sigma_s + p.sigma_y) - (1.0 - phi) / p.tau_leak * v.sigma_s
        } else {
            0.0
        };
        Vars {
            sigma_th: d_sigma_th,
            xi: d_xi,
            sigma_s: d_sigma_s,
        }
    }

    /// Advances the state by one classical RK4 step. The drive is linearly
    /// interpolated between `start` (at `self.time`) and `end`.
    pub fn step(
        &self,
        start: &Drive,
        end: &Drive,
        dt: f64,
        params: &MudDirectionalParams,
    ) -> Result<RheologyState> {
        let limit = params.max_stable_dt();
        if !(dt > 0.0) || dt > limit * (1.0 + 1e-9) {
            return Err(MudError::StepSize { dt, limit });
        }

        let mut state = *self;
        if start.gamma > 0.0 {
            state.submerged = true;
        }
        if !state.retracting
            && state.submerged
            && heaviside_smooth(start.gamma_dot, params.nu) > 0.5
        {
            state.retracting = true;
            state.t_w = state.time;
            state.gamma_0 = start.gamma;
            state.sigma_s = 0.0;
        }

        let mid = start.lerp(end, 0.5);
        let y = Vars {
            sigma_th: state.sigma_th,
            xi: state.xi,
            sigma_s: state.sigma_s,
        };
        let k1 = state.rates(y, start, params);
        let k2 = state.rates(y.axpy(0.5 * dt, k1), &mid, params);
        let k3 = state.rates(y.axpy(0.5 * dt, k2), &mid, params);
        let k4 = state.rates(y.axpy(dt, k3), end, params);
        let h = dt / 6.0;
        state.sigma_th += h * (k1.sigma_th + 2.0 * k2.sigma_th + 2.0 * k3.sigma_th + k4.sigma_th);
        state.xi += h * (k1.xi + 2.0 * k2.xi + 2.0 * k3.xi + k4.xi);
        state.sigma_s += h * (k1.sigma_s + 2.0 * k2.sigma_s + 2.0 * k3.sigma_s + k4.sigma_s);

        state.xi = state.xi.clamp(0.0, 1.0);
        state.sigma_s = state.sigma_s.clamp(-params.sigma_y, 0.0);
        if end.gamma > 0.0 {
            state.submerged = true;
        }
        state.time += dt;
        Ok(state)
    }

    /// Total stress and its parts for the current state.
    pub fn stress(&self, gamma: f64, gamma_dot: f64, params: &MudDirectionalParams) -> StressParts {
        let immediate = params.alpha * gamma.max(0.0).powf(params.n);
        let switch = heaviside_smooth(gamma_dot, params.nu);
        StressParts {
            immediate,
            thixotropic: self.sigma_th,
            suction: self.sigma_s,
            switch,
            total: immediate + self.sigma_th + switch * self.sigma_s,
        }
    }
}

/// One RK4 step with the drive held constant over the step.
pub fn step_rheology(
    state: &RheologyState,
    gamma: f64,
    gamma_dot: f64,
    gamma_ddot: f64,
    dt: f64,
    params: &MudDirectionalParams,
) -> Result<RheologyState> {
    let d = Drive::new(gamma, gamma_dot, gamma_ddot);
    state.step(&d, &d, dt, params)
}

/// `sigma_b + sigma_th + H_nu(gamma_dot) * sigma_s`.
pub fn total_stress(
    state: &RheologyState,
    gamma: f64,
    gamma_dot: f64,
    params: &MudDirectionalParams,
) -> f64 {
    state.stress(gamma, gamma_dot, params).total
}

/// Breakdown of the total stress of one direction.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct StressParts {
    pub immediate: f64,
    pub thixotropic: f64,
    pub suction: f64,
    /// Value of the smooth switch that gates the suction term.
    pub switch: f64,
    pub total: f64,
}
