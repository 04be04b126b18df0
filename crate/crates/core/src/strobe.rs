//! The stroboscopic map `f : [0, x_ref] -> [0, x_ref]` sending the state at
//! one clock pulse (in ON mode) to the state at the next one.
//!
//! For `x <= x_border` the ON phase outlasts the period and `f` is affine
//! with slope `e^{-alpha_on}`. Above the border the trajectory switches off
//! inside the period and `f` is decreasing.

use crate::error::{Error, Result};
use crate::params::{validate_params, x_border, ConverterParams};

/// Absolute tolerance on the fixed point.
pub const FIXED_POINT_TOL: f64 = 1e-12;
pub const MAX_BISECTION_ITERS: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StrobeBranch {
    /// `x <= x_border`
    Smooth,
    /// `x > x_border`
    Switching,
}

pub fn branch(p: &ConverterParams, x: f64) -> StrobeBranch {
    if x <= x_border(p) {
        StrobeBranch::Smooth
    } else {
        StrobeBranch::Switching
    }
}

fn check_domain(p: &ConverterParams, x: f64) -> Result<()> {
    if !(0.0..=p.x_ref).contains(&x) {
        return Err(Error::domain(format!(
            "stroboscopic map argument {x} outside [0, {}]",
            p.x_ref
        )));
    }
    Ok(())
}

// Branch formulas without the domain check, shared with the bisection loop.
fn f_unchecked(p: &ConverterParams, x: f64) -> f64 {
    let eq = p.on_equilibrium();
    match branch(p, x) {
        StrobeBranch::Smooth => eq + (x - eq) * (-p.alpha_on).exp(),
        StrobeBranch::Switching => {
            p.x_ref
                * (-p.alpha_off).exp()
                * ((eq - x) / (eq - p.x_ref)).powf(p.alpha_off / p.alpha_on)
        }
    }
}

pub fn strobe_f(p: &ConverterParams, x: f64) -> Result<f64> {
    check_domain(p, x)?;
    Ok(f_unchecked(p, x))
}

/// Derivative of `f`. Undefined at `x_border`, where it jumps.
pub fn strobe_f_prime(p: &ConverterParams, x: f64) -> Result<f64> {
    check_domain(p, x)?;
    if x == x_border(p) {
        return Err(Error::domain("f' is discontinuous at x_border"));
    }
    Ok(match branch(p, x) {
        StrobeBranch::Smooth => (-p.alpha_on).exp(),
        StrobeBranch::Switching => -p.alpha_off * f_unchecked(p, x) / (p.beta - p.alpha_on * x),
    })
}

/// Unique fixed point `x*` and `f'(x*)`, by bisection of `f(x) - x` on
/// `[x_border, x_ref]`.
pub fn find_fixed_point(p: &ConverterParams) -> Result<(f64, f64)> {
    validate_params(p)?;
    let h = |x: f64| f_unchecked(p, x) - x;
    let (mut lo, mut hi) = (x_border(p), p.x_ref);
    if !(h(lo) > 0.0 && h(hi) < 0.0) {
        return Err(Error::Internal(format!(
            "fixed point not bracketed on [{lo}, {hi}]"
        )));
    }
    for _ in 0..MAX_BISECTION_ITERS {
        if hi - lo <= FIXED_POINT_TOL {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if h(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let x_star = 0.5 * (lo + hi);
    Ok((x_star, strobe_f_prime(p, x_star)?))
}

/// `x0, f(x0), f(f(x0)), ...` with `n` applications of the map.
pub fn cobweb(p: &ConverterParams, x0: f64, n: usize) -> Result<Vec<f64>> {
    check_domain(p, x0)?;
    let mut out = Vec::with_capacity(n + 1);
    let mut x = x0;
    out.push(x);
    for _ in 0..n {
        x = f_unchecked(p, x);
        out.push(x);
    }
    Ok(out)
}
