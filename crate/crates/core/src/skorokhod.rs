//! Skorokhod distance between hybrid càdlàg paths on `[0, T]`.
//!
//! ```text
//! d(z1, z2) = inf over lambda of  gamma(lambda) v sup_t r(z1(t), z2(lambda(t)))
//! gamma(lambda) = sup_{s<t} |log((lambda(t) - lambda(s)) / (t - s))|
//! ```
//!
//! The infimum is not computed in general. Every bound here is evaluated at
//! an explicit piecewise-linear `lambda`, which makes it an upper bound on
//! `d` up to the resolution of the sup grid.
//!
//! For piecewise-linear `lambda`, `gamma` equals the largest `|log slope|`
//! over its pieces: any chord slope `(lambda(t) - lambda(s)) / (t - s)` is a
//! convex combination of the piece slopes between `s` and `t`, so it lies
//! between the smallest and largest of them, and `|log|` is quasi-convex.

use std::cmp::Ordering;

use rayon::prelude::*;
use serde::Serialize;

use crate::det::{DetPath, DetSchedule};
use crate::error::{Error, Result};
use crate::sde::{StochPath, StochSchedule};
use crate::state::HybridState;

/// Default spacing of the sup grid.
pub const DEFAULT_SUP_STEP: f64 = 1e-3;

/// Euclidean metric on `R x {0, 1}`.
pub fn r_metric(z1: HybridState, z2: HybridState) -> f64 {
    let dx = z1.x - z2.x;
    let dy = z1.y() as f64 - z2.y() as f64;
    (dx * dx + dy * dy).sqrt()
}

/// A right-continuous hybrid path with left limits on `[0, horizon]`.
///
/// `at` and `left` are only called with `t` in `[0, horizon]`.
pub trait CadlagHybridPath {
    fn horizon(&self) -> f64;
    fn at(&self, t: f64) -> HybridState;
    /// Left limit; `at(0)` at `t = 0`.
    fn left(&self, t: f64) -> HybridState;
    /// Mode-switch times, increasing.
    fn jump_times(&self) -> Vec<f64>;
    /// Bound on `|dx/dt|` between jumps.
    fn x_lipschitz(&self) -> f64;
}

impl CadlagHybridPath for DetPath {
    fn horizon(&self) -> f64 {
        DetPath::horizon(self)
    }
    fn at(&self, t: f64) -> HybridState {
        self.eval_unchecked(t)
    }
    fn left(&self, t: f64) -> HybridState {
        self.eval_left_unchecked(t)
    }
    fn jump_times(&self) -> Vec<f64> {
        self.schedule().jump_times()
    }
    fn x_lipschitz(&self) -> f64 {
        DetPath::x_lipschitz(self)
    }
}

impl CadlagHybridPath for StochPath {
    fn horizon(&self) -> f64 {
        StochPath::horizon(self)
    }
    fn at(&self, t: f64) -> HybridState {
        self.eval_unchecked(t)
    }
    fn left(&self, t: f64) -> HybridState {
        self.eval_left_unchecked(t)
    }
    fn jump_times(&self) -> Vec<f64> {
        self.schedule().jump_times()
    }
    fn x_lipschitz(&self) -> f64 {
        StochPath::x_lipschitz(self)
    }
}

/// `t -> inner(warp(t))`.
#[derive(Debug, Clone)]
pub struct TimeWarped<'a, P: ?Sized> {
    pub inner: &'a P,
    pub warp: TimeDeformation,
}

impl<P: CadlagHybridPath + ?Sized> CadlagHybridPath for TimeWarped<'_, P> {
    fn horizon(&self) -> f64 {
        self.warp.horizon()
    }
    fn at(&self, t: f64) -> HybridState {
        self.inner.at(self.warp.apply(t))
    }
    fn left(&self, t: f64) -> HybridState {
        self.inner.left(self.warp.apply(t))
    }
    fn jump_times(&self) -> Vec<f64> {
        self.inner.jump_times().into_iter().map(|u| self.warp.inverse(u)).collect()
    }
    fn x_lipschitz(&self) -> f64 {
        let max_slope = self.warp.slopes().into_iter().fold(0.0, f64::max);
        self.inner.x_lipschitz() * max_slope
    }
}

/// Increasing piecewise-linear bijection of `[0, T]` given by its knots.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TimeDeformation {
    knots: Vec<(f64, f64)>,
}

impl TimeDeformation {
    /// Knots must start at `(0, 0)`, end at `(T, T)` and increase strictly
    /// in both coordinates.
    pub fn new(knots: Vec<(f64, f64)>) -> Result<Self> {
        if knots.len() < 2 {
            return Err(Error::domain("a time deformation needs at least two knots"));
        }
        let (t0, l0) = knots[0];
        let (tn, ln) = knots[knots.len() - 1];
        if t0 != 0.0 || l0 != 0.0 {
            return Err(Error::domain("time deformation must fix 0"));
        }
        if tn != ln || !(tn > 0.0) || !tn.is_finite() {
            return Err(Error::domain(format!(
                "time deformation must map the horizon to itself, got ({tn}, {ln})"
            )));
        }
        if knots.windows(2).any(|w| !(w[1].0 > w[0].0 && w[1].1 > w[0].1)) {
            return Err(Error::domain("time deformation knots must increase strictly"));
        }
        Ok(Self { knots })
    }

    pub fn identity(horizon: f64) -> Self {
        Self { knots: vec![(0.0, 0.0), (horizon, horizon)] }
    }

    pub fn knots(&self) -> &[(f64, f64)] {
        &self.knots
    }

    pub fn horizon(&self) -> f64 {
        self.knots[self.knots.len() - 1].0
    }

    pub fn slopes(&self) -> Vec<f64> {
        self.knots
            .windows(2)
            .map(|w| (w[1].1 - w[0].1) / (w[1].0 - w[0].0))
            .collect()
    }

    /// `max |log slope|` over the pieces.
    pub fn gamma(&self) -> f64 {
        self.slopes().into_iter().map(|s| s.ln().abs()).fold(0.0, f64::max)
    }

    /// Exact at knots.
    pub fn apply(&self, t: f64) -> f64 {
        Self::interp(&self.knots, t, |k| k.0, |k| k.1)
    }

    pub fn inverse(&self, s: f64) -> f64 {
        Self::interp(&self.knots, s, |k| k.1, |k| k.0)
    }

    fn interp(
        knots: &[(f64, f64)],
        u: f64,
        from: impl Fn(&(f64, f64)) -> f64,
        to: impl Fn(&(f64, f64)) -> f64,
    ) -> f64 {
        let i = knots.partition_point(|k| from(k) <= u).clamp(1, knots.len() - 1) - 1;
        let (a, b) = (&knots[i], &knots[i + 1]);
        if u == from(a) {
            return to(a);
        }
        if u == from(b) {
            return to(b);
        }
        to(a) + (u - from(a)) * ((to(b) - to(a)) / (from(b) - from(a)))
    }

    pub fn inverse_deformation(&self) -> Self {
        Self { knots: self.knots.iter().map(|&(t, l)| (l, t)).collect() }
    }

    /// `t -> self(inner(t))`.
    pub fn compose(&self, inner: &TimeDeformation) -> Result<Self> {
        if self.horizon() != inner.horizon() {
            return Err(Error::domain("composing deformations of different horizons"));
        }
        let mut times: Vec<f64> = inner.knots.iter().map(|k| k.0).collect();
        times.extend(self.knots.iter().map(|k| inner.inverse(k.0)));
        times.sort_by(f64::total_cmp);
        let tol = 1e-12 * self.horizon();
        times.dedup_by(|b, a| *b - *a <= tol);
        let horizon = self.horizon();
        *times.last_mut().expect("at least two knots") = horizon;
        let knots = times.into_iter().map(|t| (t, self.apply(inner.apply(t)))).collect();
        Self::new(knots)
    }
}

/// The aligning deformation: piecewise linear through `s_{n-1} -> sigma_{n-1}`,
/// `t_n -> tau_n`, `s_n -> sigma_n`.
///
/// Returns `None` unless both schedules have the same switches within the
/// horizon with `sigma_n = s_n`; callers then fall back to the identity.
pub fn paper_lambda(det: &DetSchedule, taus: &[f64], sigmas: &[f64], horizon: f64) -> Option<TimeDeformation> {
    let taus: Vec<f64> = taus.iter().copied().filter(|&t| t <= horizon).collect();
    let sigmas: Vec<f64> = sigmas.iter().copied().filter(|&s| s <= horizon).collect();
    if det.t.len() != taus.len() || det.s != sigmas || det.horizon != horizon {
        return None;
    }
    let mut knots = vec![(0.0, 0.0)];
    if det.s0 > 0.0 && det.s0 < horizon {
        knots.push((det.s0, det.s0));
    }
    for (n, (&t, &tau)) in det.t.iter().zip(&taus).enumerate() {
        knots.push((t, tau));
        if let Some(&s) = det.s.get(n) {
            knots.push((s, s));
        }
    }
    if knots.last().is_some_and(|k| k.0 < horizon) {
        knots.push((horizon, horizon));
    }
    TimeDeformation::new(knots).ok()
}

/// [`paper_lambda`] against a simulated schedule.
pub fn paper_lambda_for(det: &DetSchedule, stoch: &StochSchedule) -> Option<TimeDeformation> {
    paper_lambda(det, &stoch.taus(), &stoch.sigmas(), stoch.horizon)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum BoundMethod {
    Identity,
    PaperLambda,
    BruteForce,
}

impl BoundMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            BoundMethod::Identity => "identity",
            BoundMethod::PaperLambda => "paper_lambda",
            BoundMethod::BruteForce => "bruteforce",
        }
    }
}

/// `gamma v sup r` at one deformation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DistanceBound {
    pub gamma: f64,
    /// Sup of `r(z1(t), z2(lambda(t)))` over the grid and all jump points.
    pub sup_r: f64,
    pub bound: f64,
    /// Lipschitz allowance for the x-mismatch between grid points. The
    /// mode mismatch needs none: it only changes at evaluated points.
    pub slack: f64,
    pub method: BoundMethod,
}

fn check_horizons<A, B>(z1: &A, z2: &B, lam: &TimeDeformation) -> Result<()>
where
    A: CadlagHybridPath + ?Sized,
    B: CadlagHybridPath + ?Sized,
{
    if z1.horizon() != z2.horizon() || z1.horizon() != lam.horizon() {
        return Err(Error::domain(format!(
            "horizon mismatch: paths {} and {}, deformation {}",
            z1.horizon(),
            z2.horizon(),
            lam.horizon()
        )));
    }
    Ok(())
}

/// Jump times of `z1` and preimages of jump times of `z2`.
fn special_points<A, B>(z1: &A, z2: &B, lam: &TimeDeformation) -> Vec<f64>
where
    A: CadlagHybridPath + ?Sized,
    B: CadlagHybridPath + ?Sized,
{
    let mut pts = z1.jump_times();
    pts.extend(z2.jump_times().into_iter().map(|u| lam.inverse(u)));
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    pts
}

/// Sup of `r(z1(t), z2(lam(t)))` over `[a, b]`: a uniform grid of spacing at
/// most `step`, plus right values and left limits at every special point.
/// Returns the sup and the grid spacing used.
fn sup_r_over<A, B>(z1: &A, z2: &B, lam: &TimeDeformation, a: f64, b: f64, step: f64, specials: &[f64]) -> (f64, f64)
where
    A: CadlagHybridPath + ?Sized,
    B: CadlagHybridPath + ?Sized,
{
    let len = b - a;
    let n = ((len / step).ceil() as usize).max(1);
    let h = len / n as f64;
    let mut sup: f64 = 0.0;
    for i in 0..=n {
        let t = if i == n { b } else { a + i as f64 * h };
        sup = sup.max(r_metric(z1.at(t), z2.at(lam.apply(t))));
    }
    let lo = specials.partition_point(|&s| s < a);
    for &t in specials[lo..].iter().take_while(|&&s| s <= b) {
        let lt = lam.apply(t);
        sup = sup.max(r_metric(z1.at(t), z2.at(lt)));
        if t > 0.0 {
            sup = sup.max(r_metric(z1.left(t), z2.left(lt)));
        }
    }
    (sup, h)
}

fn bound_at<A, B>(z1: &A, z2: &B, lam: &TimeDeformation, step: f64, method: BoundMethod) -> Result<DistanceBound>
where
    A: CadlagHybridPath + ?Sized,
    B: CadlagHybridPath + ?Sized,
{
    check_horizons(z1, z2, lam)?;
    if !(step > 0.0) {
        return Err(Error::domain(format!("sup grid step {step} must be positive")));
    }
    let specials = special_points(z1, z2, lam);
    let (sup_r, h) = sup_r_over(z1, z2, lam, 0.0, z1.horizon(), step, &specials);
    let gamma = lam.gamma();
    let max_slope = lam.slopes().into_iter().fold(0.0, f64::max);
    Ok(DistanceBound {
        gamma,
        sup_r,
        bound: gamma.max(sup_r),
        slack: 0.5 * h * (z1.x_lipschitz() + z2.x_lipschitz() * max_slope),
        method,
    })
}

/// `gamma(lam) v sup_t r(z1(t), z2(lam(t)))`.
pub fn sk_upper_bound<A, B>(z1: &A, z2: &B, lam: &TimeDeformation, step: f64) -> Result<DistanceBound>
where
    A: CadlagHybridPath + ?Sized,
    B: CadlagHybridPath + ?Sized,
{
    let method = if lam.knots().len() == 2 {
        BoundMethod::Identity
    } else {
        BoundMethod::PaperLambda
    };
    bound_at(z1, z2, lam, step, method)
}

/// Uniform distance, the bound at `lambda = identity`.
pub fn uniform_distance<A, B>(z1: &A, z2: &B, step: f64) -> Result<DistanceBound>
where
    A: CadlagHybridPath + ?Sized,
    B: CadlagHybridPath + ?Sized,
{
    bound_at(z1, z2, &TimeDeformation::identity(z1.horizon()), step, BoundMethod::Identity)
}

/// Whether `y1(t) = y2(lam(t))` at every grid and jump point.
pub fn modes_aligned<A, B>(z1: &A, z2: &B, lam: &TimeDeformation, step: f64) -> bool
where
    A: CadlagHybridPath + ?Sized,
    B: CadlagHybridPath + ?Sized,
{
    let specials = special_points(z1, z2, lam);
    let horizon = z1.horizon();
    let n = ((horizon / step).ceil() as usize).max(1);
    let grid = (0..=n).map(|i| if i == n { horizon } else { i as f64 * horizon / n as f64 });
    grid.chain(specials.iter().copied())
        .all(|t| z1.at(t).mode == z2.at(lam.apply(t)).mode)
}

pub const MAX_BRUTEFORCE_HORIZON: f64 = 3.0;
pub const MAX_BRUTEFORCE_JUMPS: usize = 4;

#[derive(Debug, Clone, PartialEq)]
pub struct BruteForce {
    pub bound: DistanceBound,
    pub lambda: TimeDeformation,
}

// Candidate inside one anchored piece: interior knot at fraction `frac` of
// the piece, first sub-slope `ratio` times the chord slope.
#[derive(Debug, Clone, Copy)]
struct PieceCandidate {
    frac: f64,
    log_ratio: f64,
    value: f64,
    knot: (f64, f64),
}

fn better(a: &PieceCandidate, b: &PieceCandidate) -> Ordering {
    a.value
        .total_cmp(&b.value)
        .then(a.knot.0.total_cmp(&b.knot.0))
        .then(a.knot.1.total_cmp(&b.knot.1))
}

/// Small-instance search over piecewise-linear deformations.
///
/// When both paths switch modes the same number of times in the same
/// order, jump `j` of `z1` is pinned to jump `j` of `z2`. Each piece between
/// pins gets one free interior knot, searched over `k` positions and `m`
/// slope ratios and then refined by coordinate descent. The pieces
/// decouple: a piece's knot only moves `lambda` and the sup on that piece.
/// The identity is always a candidate. The result is an upper bound on the
/// Skorokhod distance.
pub fn sk_bruteforce<A, B>(z1: &A, z2: &B, k: usize, m: usize, step: f64) -> Result<BruteForce>
where
    A: CadlagHybridPath + Sync + ?Sized,
    B: CadlagHybridPath + Sync + ?Sized,
{
    let horizon = z1.horizon();
    if horizon != z2.horizon() {
        return Err(Error::domain("horizon mismatch"));
    }
    let (j1, j2) = (z1.jump_times(), z2.jump_times());
    if horizon > MAX_BRUTEFORCE_HORIZON || j1.len() > MAX_BRUTEFORCE_JUMPS || j2.len() > MAX_BRUTEFORCE_JUMPS {
        return Err(Error::domain(format!(
            "instance too large for brute force: T = {horizon}, jumps {} and {} (max T = {MAX_BRUTEFORCE_HORIZON}, {MAX_BRUTEFORCE_JUMPS} jumps)",
            j1.len(),
            j2.len()
        )));
    }
    if k == 0 || m == 0 {
        return Err(Error::domain("brute force needs k >= 1 and m >= 1"));
    }

    let identity = TimeDeformation::identity(horizon);
    let mut best = BruteForce {
        bound: bound_at(z1, z2, &identity, step, BoundMethod::BruteForce)?,
        lambda: identity,
    };

    let compatible = j1.len() == j2.len()
        && j1.iter().zip(&j2).all(|(&u, &w)| {
            z1.at(u).mode == z2.at(w).mode && z1.left(u).mode == z2.left(w).mode
        });
    if !compatible {
        return Ok(best);
    }

    let mut anchors = vec![(0.0, 0.0)];
    for (&u, &w) in j1.iter().zip(&j2) {
        if u > 0.0 && w > 0.0 && u < horizon && w < horizon {
            anchors.push((u, w));
        } else if (u == horizon) != (w == horizon) || (u == 0.0) != (w == 0.0) {
            return Ok(best);
        }
    }
    anchors.push((horizon, horizon));
    let Ok(base) = TimeDeformation::new(anchors.clone()) else {
        return Ok(best);
    };

    let specials = special_points(z1, z2, &base);
    let mut interior = Vec::with_capacity(anchors.len() - 1);
    let mut total: f64 = 0.0;
    for w in anchors.windows(2) {
        let cand = best_piece(z1, z2, &anchors, w[0], w[1], k, m, step, &specials);
        total = total.max(cand.value);
        interior.push(cand.knot);
    }

    let mut knots = Vec::with_capacity(2 * anchors.len());
    for (i, &a) in anchors.iter().enumerate() {
        knots.push(a);
        if let Some(&c) = interior.get(i) {
            if c.0 > a.0 && c.0 < anchors[i + 1].0 {
                knots.push(c);
            }
        }
    }
    let lambda = TimeDeformation::new(knots)?;
    if total < best.bound.bound {
        best = BruteForce {
            bound: bound_at(z1, z2, &lambda, step, BoundMethod::BruteForce)?,
            lambda,
        };
    }
    Ok(best)
}

#[allow(clippy::too_many_arguments)]
fn best_piece<A, B>(
    z1: &A,
    z2: &B,
    anchors: &[(f64, f64)],
    a: (f64, f64),
    b: (f64, f64),
    k: usize,
    m: usize,
    step: f64,
    specials: &[f64],
) -> PieceCandidate
where
    A: CadlagHybridPath + Sync + ?Sized,
    B: CadlagHybridPath + Sync + ?Sized,
{
    let chord = (b.1 - a.1) / (b.0 - a.0);
    let spread = (2.0 * chord.ln().abs()).max(0.25);

    let evaluate = |frac: f64, log_ratio: f64| -> Option<PieceCandidate> {
        let s1 = chord * log_ratio.exp();
        if !(frac > 0.0 && frac < 1.0 && s1 * frac * (b.0 - a.0) < b.1 - a.1) {
            return None;
        }
        let c = a.0 + frac * (b.0 - a.0);
        let knot = (c, a.1 + s1 * (c - a.0));
        let s2 = (b.1 - knot.1) / (b.0 - c);
        // chords elsewhere; only this piece is measured
        let knots: Vec<(f64, f64)> = anchors
            .iter()
            .flat_map(|&q| if q == a { vec![q, knot] } else { vec![q] })
            .collect();
        let lam = TimeDeformation::new(knots).ok()?;
        let (sup, _) = sup_r_over(z1, z2, &lam, a.0, b.0, step, specials);
        let gamma = s1.ln().abs().max(s2.ln().abs());
        Some(PieceCandidate { frac, log_ratio, value: gamma.max(sup), knot })
    };

    let mut grid = Vec::with_capacity(k * (m + 1));
    for i in 1..=k {
        let frac = i as f64 / (k + 1) as f64;
        for j in 0..m {
            let u = if m == 1 { 0.0 } else { 2.0 * j as f64 / (m - 1) as f64 - 1.0 };
            grid.push((frac, spread * u));
        }
        if m.is_multiple_of(2) {
            grid.push((frac, 0.0));
        }
    }
    let mut best = grid
        .into_par_iter()
        .filter_map(|(f, r)| evaluate(f, r))
        .min_by(better)
        .expect("the unbent chord is always a valid candidate");

    let mut df = 0.5 / (k + 1) as f64;
    let mut dr = if m > 1 { spread / (m - 1) as f64 } else { 0.5 * spread };
    for _ in 0..30 {
        let mut improved = false;
        for (ddf, ddr) in [(df, 0.0), (-df, 0.0), (0.0, dr), (0.0, -dr)] {
            if let Some(c) = evaluate(best.frac + ddf, best.log_ratio + ddr) {
                if better(&c, &best) == Ordering::Less {
                    best = c;
                    improved = true;
                }
            }
        }
        if !improved {
            df *= 0.5;
            dr *= 0.5;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::det::simulate_det;
    use crate::params::{derive_constants, ConverterParams};
    use crate::state::Mode;
    use proptest::prelude::*;

    #[test]
    fn metric_values() {
        let a = HybridState::on(0.3);
        assert_eq!(r_metric(a, a), 0.0);
        assert_eq!(r_metric(HybridState::on(0.4), HybridState::off(0.4)), 1.0);
        let v = r_metric(HybridState::on(0.3), HybridState::off(0.7));
        assert!((v - 1.16f64.sqrt()).abs() < 1e-15);
        assert!((v - 1.0770).abs() < 1e-4);
    }

    #[test]
    fn deformation_validation() {
        assert_eq!(TimeDeformation::identity(3.0).gamma(), 0.0);
        assert!(TimeDeformation::new(vec![(0.0, 0.0), (1.0, 2.0)]).is_err());
        assert!(TimeDeformation::new(vec![(0.0, 0.0), (0.5, 0.6), (0.4, 0.7), (1.0, 1.0)]).is_err());
        assert!(TimeDeformation::new(vec![(0.0, 0.1), (1.0, 1.0)]).is_err());
        let lam = TimeDeformation::new(vec![(0.0, 0.0), (0.5, 0.45), (1.0, 1.0)]).unwrap();
        let expected = 0.9f64.ln().abs().max(1.1f64.ln().abs());
        assert!((lam.gamma() - expected).abs() < 1e-12);
        assert_eq!(lam.apply(0.5), 0.45);
        assert_eq!(lam.inverse(0.45), 0.5);
    }

    #[test]
    fn aligning_deformation_single_cycle() {
        let det = DetSchedule { s0: 0.0, t: vec![0.4], s: vec![1.0], horizon: 1.0 };
        let lam = paper_lambda(&det, &[0.4], &[1.0], 1.0).unwrap();
        assert_eq!(lam.gamma(), 0.0);
        let d = 0.03;
        let lam = paper_lambda(&det, &[0.4 + d], &[1.0], 1.0).unwrap();
        let expected = (1.0 + d / 0.4).ln().abs().max((1.0 - d / 0.6).ln().abs());
        assert!((lam.gamma() - expected).abs() < 1e-12);
        assert!(paper_lambda(&det, &[], &[], 1.0).is_none());
        assert!(paper_lambda(&det, &[0.43], &[], 1.0).is_none());
    }

    fn reference_paths() -> (ConverterParams, DetPath) {
        let p = ConverterParams::reference();
        let dc = derive_constants(&p).unwrap();
        let det = DetPath::periodic_orbit(&p, &dc, 2).unwrap();
        (p, det)
    }

    #[test]
    fn identical_paths_are_at_distance_zero() {
        let (_, det) = reference_paths();
        let id = TimeDeformation::identity(2.0);
        assert_eq!(sk_upper_bound(&det, &det, &id, 1e-3).unwrap().bound, 0.0);
        assert_eq!(sk_bruteforce(&det, &det, 5, 5, 1e-3).unwrap().bound.bound, 0.0);
    }

    #[test]
    fn shifted_jump_needs_a_deformation() {
        let (p, det) = reference_paths();
        let t = &det.schedule().t;
        let shifted = DetPath::with_switch_times(&p, det.initial_state(), &[t[0] + 0.02, t[1]], 2).unwrap();
        let uniform = uniform_distance(&det, &shifted, 1e-3).unwrap();
        assert!(uniform.bound >= 1.0);
        let lam = paper_lambda(det.schedule(), &shifted.schedule().t, &shifted.schedule().s, 2.0).unwrap();
        let b = sk_upper_bound(&det, &shifted, &lam, 1e-3).unwrap();
        assert_eq!(b.method, BoundMethod::PaperLambda);
        assert!(b.bound < 0.1, "{b:?}");
        assert!(modes_aligned(&det, &shifted, &lam, 1e-3));
    }

    #[test]
    fn constant_offset_cannot_be_deformed_away() {
        let p = ConverterParams::reference();
        // ON the whole horizon from 0.02, so no jumps on [0, 1]
        let a = simulate_det(&p, HybridState::on(0.02), 1).unwrap();
        assert!(a.schedule().jump_times().is_empty());
        struct Offset<'a>(&'a DetPath, f64);
        impl CadlagHybridPath for Offset<'_> {
            fn horizon(&self) -> f64 { self.0.horizon() }
            fn at(&self, t: f64) -> HybridState { let z = self.0.at(t); HybridState::new(z.x + self.1, z.mode) }
            fn left(&self, t: f64) -> HybridState { let z = self.0.left(t); HybridState::new(z.x + self.1, z.mode) }
            fn jump_times(&self) -> Vec<f64> { vec![] }
            fn x_lipschitz(&self) -> f64 { self.0.x_lipschitz() }
        }
        let b = Offset(&a, 0.07);
        let bf = sk_bruteforce(&a, &b, 7, 7, 1e-3).unwrap();
        assert!((bf.bound.bound - 0.07).abs() < 1e-12, "{:?}", bf.bound);
        assert_eq!(a.at(0.5).mode, Mode::On);
    }

    #[test]
    fn oversized_instances_are_refused() {
        let p = ConverterParams::reference();
        let a = simulate_det(&p, HybridState::on(0.5), 4).unwrap();
        assert!(sk_bruteforce(&a, &a, 3, 3, 1e-2).is_err());
    }

    #[test]
    fn horizon_mismatch() {
        let p = ConverterParams::reference();
        let a = simulate_det(&p, HybridState::on(0.5), 2).unwrap();
        let b = simulate_det(&p, HybridState::on(0.5), 3).unwrap();
        assert!(uniform_distance(&a, &b, 1e-3).is_err());
    }

    fn deformation_strategy() -> impl Strategy<Value = TimeDeformation> {
        (1.0f64..5.0, prop::collection::vec(0.05f64..1.0, 1..6)).prop_map(|(horizon, w)| {
            // random increasing knot images via normalized positive weights
            let n = w.len();
            let total: f64 = w.iter().sum();
            let mut acc = 0.0;
            let mut knots = vec![(0.0, 0.0)];
            for (i, wi) in w.iter().enumerate().take(n - 1) {
                acc += wi;
                knots.push((horizon * (i + 1) as f64 / n as f64, horizon * acc / total));
            }
            knots.push((horizon, horizon));
            TimeDeformation::new(knots).unwrap()
        })
    }

    proptest! {
        #[test]
        fn gamma_equals_two_point_sup(lam in deformation_strategy()) {
            let horizon = lam.horizon();
            let mut pts: Vec<f64> = (0..=60).map(|i| horizon * i as f64 / 60.0).collect();
            pts.extend(lam.knots().iter().map(|k| k.0));
            let mut sup: f64 = 0.0;
            for &s in &pts {
                for &t in &pts {
                    if t > s + 1e-12 {
                        sup = sup.max(((lam.apply(t) - lam.apply(s)) / (t - s)).ln().abs());
                    }
                }
            }
            prop_assert!(sup <= lam.gamma() + 1e-9);
            prop_assert!(sup >= lam.gamma() - 1e-9);
        }

        #[test]
        fn composition_distortion_is_subadditive(a in deformation_strategy(), b in deformation_strategy()) {
            let scale = a.horizon() / b.horizon();
            let mut knots: Vec<(f64, f64)> = b.knots().iter().map(|&(t, l)| (t * scale, l * scale)).collect();
            *knots.last_mut().unwrap() = (a.horizon(), a.horizon());
            let b = TimeDeformation::new(knots).unwrap();
            let c = a.compose(&b).unwrap();
            prop_assert!(c.gamma() <= a.gamma() + b.gamma() + 1e-12);
            for i in 0..=20 {
                let t = a.horizon() * i as f64 / 20.0;
                prop_assert!((c.apply(t) - a.apply(b.apply(t))).abs() < 1e-9);
                prop_assert!((a.inverse(a.apply(t)) - t).abs() < 1e-9);
            }
        }

        #[test]
        fn metric_axioms(x1 in -5.0f64..5.0, x2 in -5.0f64..5.0, x3 in -5.0f64..5.0, y in 0u8..8) {
            let m = |b: u8| Mode::from_y(b & 1).unwrap();
            let (a, b, c) = (HybridState::new(x1, m(y)), HybridState::new(x2, m(y >> 1)), HybridState::new(x3, m(y >> 2)));
            prop_assert_eq!(r_metric(a, b), r_metric(b, a));
            prop_assert!(r_metric(a, c) <= r_metric(a, b) + r_metric(b, c) + 1e-12);
        }
    }
}
