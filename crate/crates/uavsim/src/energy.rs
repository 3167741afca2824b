//! Rotary-wing propulsion power model and relocation energy cost.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Rotary-wing power model parameters. Defaults are the reference values of
/// the standard rotary-wing model; they are configuration defaults, not
/// measured values for any particular airframe.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EnergyParams {
    /// Blade profile power in hover, watts.
    pub p0_w: f64,
    /// Induced power in hover, watts.
    pub pi_w: f64,
    /// Rotor blade tip speed, m/s.
    pub u_tip_mps: f64,
    /// Mean rotor induced velocity in hover, m/s.
    pub v0_mps: f64,
    /// Fuselage drag ratio (unitless).
    pub d0: f64,
    /// Air density, kg/m^3.
    pub rho: f64,
    /// Rotor solidity (unitless).
    pub solidity: f64,
    /// Rotor disc area, m^2.
    pub rotor_area_m2: f64,
}

impl Default for EnergyParams {
    fn default() -> Self {
        Self {
            p0_w: 79.86,
            pi_w: 88.63,
            u_tip_mps: 120.0,
            v0_mps: 4.03,
            d0: 0.6,
            rho: 1.225,
            solidity: 0.05,
            rotor_area_m2: 0.503,
        }
    }
}

impl EnergyParams {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("p0_w", self.p0_w),
            ("pi_w", self.pi_w),
            ("u_tip_mps", self.u_tip_mps),
            ("v0_mps", self.v0_mps),
            ("d0", self.d0),
            ("rho", self.rho),
            ("solidity", self.solidity),
            ("rotor_area_m2", self.rotor_area_m2),
        ];
        for (name, v) in fields {
            if !(v > 0.0) {
                return Err(Error::invalid(format!(
                    "energy parameter {name} must be positive, got {v}"
                )));
            }
        }
        Ok(())
    }
}

/// Propulsion power in watts at forward speed `v`: blade profile term,
/// induced term and parasite drag term. The induced term diverges at hover
/// in this airspeed form, so `v` must be positive.
pub fn propulsion_power(v: f64, p: &EnergyParams) -> Result<f64> {
    if !(v > 0.0) {
        return Err(Error::invalid(format!("speed must be positive, got {v}")));
    }
    let profile = p.p0_w * (1.0 + 3.0 * v * v / (p.u_tip_mps * p.u_tip_mps));
    let induced = p.pi_w * p.v0_mps / v;
    let parasite = 0.5 * p.d0 * p.rho * p.solidity * p.rotor_area_m2 * v * v * v;
    Ok(profile + induced + parasite)
}

/// Energy in joules for covering `distance` meters at cruise speed `v`:
/// power times travel time.
pub fn relocation_cost(distance: f64, v: f64, p: &EnergyParams) -> Result<f64> {
    if !(distance >= 0.0) {
        return Err(Error::invalid(format!(
            "distance must be non-negative, got {distance}"
        )));
    }
    Ok(propulsion_power(v, p)? * distance / v)
}

/// Cruise speed minimizing the per-meter relocation cost, found by
/// golden-section search over `[lo, hi]` to 1e-6 m/s. The cost is convex in
/// speed for positive parameters, so the bracketed minimum is global.
pub fn optimal_cruise_speed(p: &EnergyParams, lo: f64, hi: f64) -> Result<f64> {
    if !(lo > 0.0) || !(hi > lo) {
        return Err(Error::invalid("speed bracket must satisfy 0 < lo < hi"));
    }
    let cost = |v: f64| relocation_cost(1.0, v, p).expect("positive speed");
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (cost(c), cost(d));
    while (b - a) > 1e-6 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = cost(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = cost(d);
        }
    }
    Ok(0.5 * (a + b))
}
