//! Model constants, their admissibility region, and derived quantities.
//!
//! The clock period is fixed to 1 throughout the crate.

use std::f64::consts::LN_2;

use rand::Rng;
use serde::Serialize;

use crate::det::on_hit_time;
use crate::error::{Error, ParamError, Result, Violation};
use crate::strobe::find_fixed_point;

/// The four constants of the switching model.
///
/// ON: `dx/dt = -alpha_on x + beta`; OFF: `dx/dt = -alpha_off x`;
/// ON switches to OFF when `x` reaches `x_ref`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConverterParams {
    pub alpha_on: f64,
    pub alpha_off: f64,
    pub beta: f64,
    pub x_ref: f64,
}

impl ConverterParams {
    pub fn new(alpha_on: f64, alpha_off: f64, beta: f64, x_ref: f64) -> Self {
        Self {
            alpha_on,
            alpha_off,
            beta,
            x_ref,
        }
    }

    /// The reference set used across tests and examples:
    /// `alpha_on = 0.5, alpha_off = 0.6, beta = 1.2, x_ref = 1`.
    pub fn reference() -> Self {
        Self::new(0.5, 0.6, 1.2, 1.0)
    }

    /// Converts circuit values to model constants: `beta = V_in / L`,
    /// `alpha_on = R / L`, `alpha_off = (R + r_d) / L`. No validation.
    pub fn from_circuit(v_in: f64, load_r: f64, diode_r: f64, inductance: f64, x_ref: f64) -> Self {
        Self::new(
            load_r / inductance,
            (load_r + diode_r) / inductance,
            v_in / inductance,
            x_ref,
        )
    }

    /// ON-mode equilibrium `beta / alpha_on`.
    pub fn on_equilibrium(&self) -> f64 {
        self.beta / self.alpha_on
    }

    pub fn validate(&self) -> Result<(), ParamError> {
        validate_params(self)
    }

    /// Draws a tuple strictly inside the admissible region. Each constrained
    /// coordinate is placed uniformly in the middle 96% of its interval.
    pub fn sample_valid<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let mut inside = |lo: f64, hi: f64| lo + (hi - lo) * rng.random_range(0.02..0.98);
        let alpha_on = inside(0.0, LN_2);
        let x_ref = inside(0.1, 10.0);
        let e = alpha_on.exp();
        let beta = inside(2.0 * x_ref * alpha_on, e / (e - 1.0) * x_ref * alpha_on);
        let alpha_off = inside(alpha_on, (beta / alpha_on - x_ref) / x_ref * alpha_on);
        Self::new(alpha_on, alpha_off, beta, x_ref)
    }
}

/// Checks positivity, then every admissibility inequality strictly.
///
/// All violated inequalities are reported, not just the first.
pub fn validate_params(p: &ConverterParams) -> Result<(), ParamError> {
    for (name, value) in [
        ("alpha_on", p.alpha_on),
        ("alpha_off", p.alpha_off),
        ("beta", p.beta),
        ("x_ref", p.x_ref),
    ] {
        if !value.is_finite() || value <= 0.0 {
            return Err(ParamError::NotPositive { name, value });
        }
    }

    let e = p.alpha_on.exp();
    let checks = [
        ("alpha_on < log 2", p.alpha_on, LN_2),
        ("beta lower bound", 2.0 * p.x_ref * p.alpha_on, p.beta),
        ("beta upper bound", p.beta, e / (e - 1.0) * p.x_ref * p.alpha_on),
        ("alpha_off lower bound", p.alpha_on, p.alpha_off),
        (
            "alpha_off upper bound",
            p.alpha_off,
            (p.beta / p.alpha_on - p.x_ref) / p.x_ref * p.alpha_on,
        ),
        ("x_ref < beta/alpha_on", p.x_ref, p.beta / p.alpha_on),
    ];
    let violations: Vec<Violation> = checks
        .into_iter()
        .filter(|&(_, lhs, rhs)| !(lhs < rhs))
        .map(|(name, lhs, rhs)| Violation { name, lhs, rhs })
        .collect();

    if violations.is_empty() {
        Ok(())
    } else {
        Err(ParamError::Violated(violations))
    }
}

/// Closed-form quantities attached to a valid parameter set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DerivedConstants {
    /// Initial state whose ON phase lasts exactly one clock period.
    pub x_border: f64,
    /// Fixed point of the stroboscopic map.
    pub x_star: f64,
    /// ON duration along the periodic orbit.
    pub t_star: f64,
    pub t_on: f64,
    pub t_off: f64,
    pub t_min: f64,
    /// `beta - (alpha_on + alpha_off) x_ref`, the drift margin at threshold.
    pub mu: f64,
    pub k_minus: f64,
    pub k_plus: f64,
    pub k: f64,
    /// Upper limit on the passage tolerance for the late-passage tail bound.
    pub delta_plus: f64,
    pub f_prime_at_star: f64,
}

impl DerivedConstants {
    /// Flat `(key, value)` listing in a fixed order.
    pub fn entries(&self) -> [(&'static str, f64); 12] {
        [
            ("x_border", self.x_border),
            ("x_star", self.x_star),
            ("t_star", self.t_star),
            ("t_on", self.t_on),
            ("t_off", self.t_off),
            ("t_min", self.t_min),
            ("mu", self.mu),
            ("k_minus", self.k_minus),
            ("k_plus", self.k_plus),
            ("k", self.k),
            ("delta_plus", self.delta_plus),
            ("f_prime_at_star", self.f_prime_at_star),
        ]
    }
}

pub fn x_border(p: &ConverterParams) -> f64 {
    let eq = p.on_equilibrium();
    eq + (p.x_ref - eq) * p.alpha_on.exp()
}

pub fn derive_constants(p: &ConverterParams) -> Result<DerivedConstants> {
    validate_params(p)?;
    let (x_star, f_prime_at_star) = find_fixed_point(p)?;
    let t_star = on_hit_time(p, x_star)?;
    let mu = p.beta - (p.alpha_on + p.alpha_off) * p.x_ref;
    let k_minus = (2.0 * p.alpha_on).sqrt() * (-p.alpha_on * t_star).exp() * mu;
    let k_plus = mu * (p.alpha_on / 2.0).sqrt();
    let delta_plus = ((2.0 * p.beta - 2.0 * p.alpha_on * p.x_ref)
        / (p.beta - p.alpha_on * p.x_ref + p.alpha_off * p.x_ref))
        .ln()
        / p.alpha_on;
    let t_off = 1.0 - t_star;

    let dc = DerivedConstants {
        x_border: x_border(p),
        x_star,
        t_star,
        t_on: t_star,
        t_off,
        t_min: t_star.min(t_off),
        mu,
        k_minus,
        k_plus,
        k: k_minus.min(k_plus),
        delta_plus,
        f_prime_at_star,
    };
    if !(0.0 < dc.x_border && dc.x_border < dc.x_star && dc.x_star < p.x_ref)
        || !(0.0 < t_star && t_star < 1.0)
        || !(mu > 0.0 && delta_plus > 0.0)
        || f_prime_at_star.abs() >= 1.0
    {
        return Err(Error::Internal(format!(
            "derived constants inconsistent for valid parameters: {dc:?}"
        )));
    }
    Ok(dc)
}
