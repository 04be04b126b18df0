//! Stochastic switching system with white noise of amplitude `eps` on the
//! ON forcing:
//!
//! ```text
//! ON:  dX = (beta - alpha_on X) dt + eps dW
//! OFF: dX = -alpha_off X dt
//! ```
//!
//! ON phases are sampled on a uniform grid with the exact Ornstein-Uhlenbeck
//! transition law, so the only discretization error left is in locating the
//! first passage to `x_ref`. A passage is declared when a grid node reaches
//! the level (time placed by linear interpolation), or, with bridge
//! correction on, with the Brownian-bridge probability that the path touched
//! the level between two nodes below it (time placed mid-step). OFF phases
//! are evaluated in closed form.
//!
//! Replica `k` of seed `s` draws from ChaCha8 stream `k` keyed by `s`, so an
//! ensemble is reproducible independently of how it is scheduled.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::det::next_pulse;
use crate::error::{Error, Result};
use crate::params::{validate_params, ConverterParams};
use crate::state::{HybridState, Mode};

/// One-step transition of the ON diffusion over a step `h`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OuIncrement {
    /// `e^{-alpha_on h}`
    pub mean_coef: f64,
    /// `eps sqrt((1 - e^{-2 alpha_on h}) / (2 alpha_on))`
    pub sd: f64,
}

impl OuIncrement {
    pub fn new(p: &ConverterParams, h: f64, eps: f64) -> Self {
        let a = p.alpha_on;
        // -expm1 keeps the variance accurate for small a h
        let var_unit = -(-2.0 * a * h).exp_m1() / (2.0 * a);
        Self {
            mean_coef: (-a * h).exp(),
            sd: eps * var_unit.sqrt(),
        }
    }

    pub fn mean(&self, p: &ConverterParams, x: f64) -> f64 {
        let eq = p.on_equilibrium();
        eq + (x - eq) * self.mean_coef
    }

    pub fn step(&self, p: &ConverterParams, x: f64, gauss: f64) -> f64 {
        self.mean(p, x) + self.sd * gauss
    }
}

/// Exact ON transition from `x` over `h` driven by a standard normal draw.
pub fn ou_step(p: &ConverterParams, x: f64, h: f64, eps: f64, gauss: f64) -> f64 {
    OuIncrement::new(p, h, eps).step(p, x, gauss)
}

/// Brownian-bridge probability that the ON diffusion touched `level` during
/// a step of length `h` whose endpoints `x1`, `x2` lie at or below it.
pub fn crossing_probability(
    x1: f64,
    x2: f64,
    level: f64,
    h: f64,
    eps: f64,
    _p: &ConverterParams,
) -> Result<f64> {
    if x1 > level || x2 > level {
        return Err(Error::domain(
            "step endpoint above the level is a crossing, not a bridge event",
        ));
    }
    if !(h > 0.0) {
        return Err(Error::domain(format!("step h = {h} must be positive")));
    }
    let gap = (level - x1) * (level - x2);
    if gap == 0.0 {
        return Ok(1.0);
    }
    if eps == 0.0 {
        return Ok(0.0);
    }
    Ok((-2.0 * gap / (eps * eps * h)).exp())
}

/// Quadratic variation `<I>_t = (e^{2 alpha_on t} - 1) / (2 alpha_on)` of
/// `I_t = int_0^t e^{alpha_on u} dW_u`.
pub fn time_change(p: &ConverterParams, t: f64) -> f64 {
    (2.0 * p.alpha_on * t).exp_m1() / (2.0 * p.alpha_on)
}

/// Inverse of [`time_change`].
pub fn time_change_inverse(p: &ConverterParams, s: f64) -> f64 {
    (2.0 * p.alpha_on * s).ln_1p() / (2.0 * p.alpha_on)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StochConfig {
    pub epsilon: f64,
    pub dt: f64,
    pub horizon: u32,
    pub seed: u64,
    pub bridge_correction: bool,
}

impl Default for StochConfig {
    fn default() -> Self {
        Self {
            epsilon: 0.05,
            dt: 1e-3,
            horizon: 10,
            seed: 0,
            bridge_correction: true,
        }
    }
}

impl StochConfig {
    /// Grid nodes per clock period; `1 / dt` must be an integer.
    pub fn steps_per_unit(&self) -> Result<u64> {
        if !(self.dt > 0.0 && self.dt <= 1.0) {
            return Err(Error::config(format!("dt = {} must lie in (0, 1]", self.dt)));
        }
        let n = (1.0 / self.dt).round();
        if ((n * self.dt) - 1.0).abs() > 1e-9 {
            return Err(Error::config(format!(
                "dt = {} does not divide the clock period",
                self.dt
            )));
        }
        Ok(n as u64)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon >= 0.0 && self.epsilon.is_finite()) {
            return Err(Error::config(format!(
                "epsilon = {} must be finite and >= 0",
                self.epsilon
            )));
        }
        self.steps_per_unit().map(|_| ())
    }
}

/// Source of the random draws consumed by the simulator.
pub trait NoiseSource {
    fn standard_normal(&mut self) -> f64;
    /// Uniform on `[0, 1)`.
    fn uniform(&mut self) -> f64;
}

impl<R: Rng> NoiseSource for R {
    fn standard_normal(&mut self) -> f64 {
        self.sample(StandardNormal)
    }

    fn uniform(&mut self) -> f64 {
        self.random::<f64>()
    }
}

/// Generator for replica `replica` of a run seeded with `seed`.
pub fn replica_rng(seed: u64, replica: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(replica);
    rng
}

/// One ON/OFF cycle of a stochastic path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StochCycle {
    /// Start of the ON phase (an integer time).
    pub start: f64,
    /// ON -> OFF passage time; absent when the horizon cut the ON phase.
    pub tau: Option<f64>,
    /// Clock pulse ending the OFF phase; may lie beyond the horizon.
    pub sigma: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StochSchedule {
    pub cycles: Vec<StochCycle>,
    pub horizon: f64,
}

impl StochSchedule {
    pub fn taus(&self) -> Vec<f64> {
        self.cycles.iter().filter_map(|c| c.tau).collect()
    }

    /// OFF -> ON times within the horizon.
    pub fn sigmas(&self) -> Vec<f64> {
        self.cycles
            .iter()
            .filter_map(|c| c.sigma)
            .filter(|&s| s <= self.horizon)
            .collect()
    }

    pub fn jump_times(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(2 * self.cycles.len());
        for c in &self.cycles {
            if let Some(tau) = c.tau {
                out.push(tau);
            }
            if let Some(sigma) = c.sigma.filter(|&s| s <= self.horizon) {
                out.push(sigma);
            }
        }
        out
    }

    pub fn complete_cycles(&self) -> usize {
        self.sigmas().len()
    }

    /// Cycles whose ON phase spanned at least one ignored clock pulse.
    pub fn slow_passages(&self) -> usize {
        self.cycles
            .iter()
            .filter(|c| match c.sigma {
                Some(sigma) => sigma - c.start > 1.0,
                None => self.horizon - c.start > 1.0,
            })
            .count()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum StochSegment {
    /// ON phase on `[start, end]`, sampled at `start + i dt`; `x_end` is the
    /// value at `end` (`x_ref` when ended by a passage).
    On {
        start: f64,
        end: f64,
        x_end: f64,
        samples: Vec<f64>,
    },
    /// OFF phase decaying from `x_start` at `start`.
    Off { start: f64, end: f64, x_start: f64 },
}

impl StochSegment {
    pub fn start(&self) -> f64 {
        match self {
            StochSegment::On { start, .. } | StochSegment::Off { start, .. } => *start,
        }
    }

    pub fn end(&self) -> f64 {
        match self {
            StochSegment::On { end, .. } | StochSegment::Off { end, .. } => *end,
        }
    }

    pub fn mode(&self) -> Mode {
        match self {
            StochSegment::On { .. } => Mode::On,
            StochSegment::Off { .. } => Mode::Off,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StochPath {
    params: ConverterParams,
    z0: HybridState,
    dt: f64,
    steps_per_unit: u64,
    seed: u64,
    replica: u64,
    schedule: StochSchedule,
    segments: Vec<StochSegment>,
}

/// Replica 0 of the configuration.
pub fn simulate_stoch(p: &ConverterParams, z0: HybridState, cfg: &StochConfig) -> Result<StochPath> {
    simulate_replica(p, z0, cfg, 0)
}

pub fn simulate_replica(
    p: &ConverterParams,
    z0: HybridState,
    cfg: &StochConfig,
    replica: u64,
) -> Result<StochPath> {
    let mut rng = replica_rng(cfg.seed, replica);
    let mut path = simulate_with_noise(p, z0, cfg, &mut rng)?;
    path.replica = replica;
    Ok(path)
}

/// Replicas `0..replicas` in parallel, returned in replica order.
pub fn simulate_ensemble(
    p: &ConverterParams,
    z0: HybridState,
    cfg: &StochConfig,
    replicas: u64,
) -> Result<Vec<StochPath>> {
    (0..replicas)
        .into_par_iter()
        .map(|k| simulate_replica(p, z0, cfg, k))
        .collect()
}

/// Simulates one path drawing from `noise`.
pub fn simulate_with_noise(
    p: &ConverterParams,
    z0: HybridState,
    cfg: &StochConfig,
    noise: &mut impl NoiseSource,
) -> Result<StochPath> {
    validate_params(p)?;
    cfg.validate()?;
    if z0.mode != Mode::On || !(z0.x > 0.0 && z0.x < p.x_ref) {
        return Err(Error::domain(format!(
            "initial state must be ON with x0 in (0, x_ref), got {z0:?}"
        )));
    }

    let n_unit = cfg.steps_per_unit()?;
    let per_unit = n_unit as f64;
    let dt = 1.0 / per_unit;
    let total = cfg.horizon as u64 * n_unit;
    let horizon = cfg.horizon as f64;
    let eps = cfg.epsilon;
    let inc = OuIncrement::new(p, dt, eps);
    let bridge = cfg.bridge_correction && eps > 0.0;

    let mut segments = Vec::new();
    let mut cycles = Vec::new();
    let mut start_unit: u64 = 0;
    let mut x = z0.x;

    while start_unit < cfg.horizon as u64 {
        let start = start_unit as f64;
        let mut k = start_unit * n_unit;
        let mut samples = vec![x];
        let mut tau = None;
        while k < total {
            let x_new = inc.step(p, x, noise.standard_normal());
            let t_k = k as f64 / per_unit;
            if x_new >= p.x_ref {
                tau = Some(t_k + dt * (p.x_ref - x) / (x_new - x));
                break;
            }
            if bridge {
                let gap = (p.x_ref - x) * (p.x_ref - x_new);
                let touch = (-2.0 * gap / (eps * eps * dt)).exp();
                if noise.uniform() < touch {
                    tau = Some(t_k + 0.5 * dt);
                    break;
                }
            }
            samples.push(x_new);
            x = x_new;
            k += 1;
        }

        let Some(tau) = tau else {
            let x_end = *samples.last().unwrap();
            segments.push(StochSegment::On { start, end: horizon, x_end, samples });
            cycles.push(StochCycle { start, tau: None, sigma: None });
            break;
        };
        segments.push(StochSegment::On { start, end: tau, x_end: p.x_ref, samples });
        let sigma = next_pulse(tau);
        segments.push(StochSegment::Off { start: tau, end: sigma.min(horizon), x_start: p.x_ref });
        cycles.push(StochCycle { start, tau: Some(tau), sigma: Some(sigma) });
        if sigma > horizon {
            break;
        }
        x = p.x_ref * (-p.alpha_off * (sigma - tau)).exp();
        start_unit = sigma as u64;
    }
    if start_unit == cfg.horizon as u64 && matches!(segments.last(), Some(StochSegment::Off { .. })) {
        segments.push(StochSegment::On { start: horizon, end: horizon, x_end: x, samples: vec![x] });
    }

    Ok(StochPath {
        params: *p,
        z0,
        dt,
        steps_per_unit: n_unit,
        seed: cfg.seed,
        replica: 0,
        schedule: StochSchedule { cycles, horizon },
        segments,
    })
}

impl StochPath {
    pub fn params(&self) -> &ConverterParams {
        &self.params
    }

    pub fn schedule(&self) -> &StochSchedule {
        &self.schedule
    }

    pub fn segments(&self) -> &[StochSegment] {
        &self.segments
    }

    pub fn horizon(&self) -> f64 {
        self.schedule.horizon
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn replica(&self) -> u64 {
        self.replica
    }

    pub fn eval(&self, t: f64) -> Result<HybridState> {
        if !(0.0..=self.horizon()).contains(&t) {
            return Err(Error::domain(format!("t = {t} outside [0, {}]", self.horizon())));
        }
        Ok(self.eval_unchecked(t))
    }

    pub(crate) fn eval_unchecked(&self, t: f64) -> HybridState {
        let i = self.segments.partition_point(|s| s.start() <= t);
        match i.checked_sub(1) {
            Some(i) => self.state_in(&self.segments[i], t),
            None => self.z0,
        }
    }

    pub(crate) fn eval_left_unchecked(&self, t: f64) -> HybridState {
        if t <= 0.0 {
            return self.eval_unchecked(0.0);
        }
        let i = self.segments.partition_point(|s| s.start() < t);
        match i.checked_sub(1) {
            Some(i) => self.state_in(&self.segments[i], t),
            None => self.z0,
        }
    }

    fn state_in(&self, seg: &StochSegment, t: f64) -> HybridState {
        match seg {
            StochSegment::Off { start, x_start, .. } => {
                HybridState::off(x_start * (-self.params.alpha_off * (t - start)).exp())
            }
            StochSegment::On { start, end, x_end, samples } => {
                let last = samples.len() - 1;
                let i = (((t - start) * self.steps_per_unit as f64).floor().max(0.0) as usize).min(last);
                let t_i = start + i as f64 * self.dt;
                let (t_next, x_next) = if i < last {
                    (t_i + self.dt, samples[i + 1])
                } else {
                    (*end, *x_end)
                };
                let x = if t_next > t_i {
                    let w = ((t - t_i) / (t_next - t_i)).clamp(0.0, 1.0);
                    samples[i] + w * (x_next - samples[i])
                } else {
                    samples[i]
                };
                HybridState::on(x)
            }
        }
    }

    /// Largest slope of the piecewise-linear ON interpolant or OFF decay.
    pub fn x_lipschitz(&self) -> f64 {
        let mut l: f64 = 0.0;
        for seg in &self.segments {
            match seg {
                StochSegment::Off { x_start, .. } => l = l.max(self.params.alpha_off * x_start.abs()),
                StochSegment::On { start, end, x_end, samples } => {
                    for w in samples.windows(2) {
                        l = l.max((w[1] - w[0]).abs() / self.dt);
                    }
                    let t_last = start + (samples.len() - 1) as f64 * self.dt;
                    if *end > t_last {
                        l = l.max((x_end - samples[samples.len() - 1]).abs() / (end - t_last));
                    }
                }
            }
        }
        l
    }

    /// `(t, x, y)` at every grid node `k dt` in `[0, horizon]`.
    pub fn grid_samples(&self) -> Vec<(f64, f64, u8)> {
        let total = self.horizon() as u64 * self.steps_per_unit;
        (0..=total)
            .map(|k| {
                let t = k as f64 / self.steps_per_unit as f64;
                let z = self.eval_unchecked(t);
                (t, z.x, z.y())
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::det::simulate_det;
    use crate::params::derive_constants;

    fn p0() -> ConverterParams {
        ConverterParams::reference()
    }

    #[test]
    fn zero_noise_step_is_the_flow() {
        let p = p0();
        for &(x, h) in &[(0.3, 0.1), (0.9, 0.01), (0.5, 2.0)] {
            let g = 1.7;
            assert_eq!(ou_step(&p, x, h, 0.0, g), crate::det::on_flow(&p, x, h));
            assert_eq!(ou_step(&p, x, h, 0.05, 0.0), OuIncrement::new(&p, h, 0.05).mean(&p, x));
        }
    }

    #[test]
    fn small_step_sd_limit() {
        let p = p0();
        let inc = OuIncrement::new(&p, 1e-8, 0.3);
        assert!((inc.sd / (0.3 * 1e-4) - 1.0).abs() < 1e-6);
    }

    #[test]
    fn moment_match() {
        use rand::SeedableRng;
        let p = p0();
        let dc = derive_constants(&p).unwrap();
        let (h, eps) = (0.1, 0.05);
        let inc = OuIncrement::new(&p, h, eps);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let n = 100_000;
        let draws: Vec<f64> = (0..n).map(|_| ou_step(&p, dc.x_star, h, eps, rng.standard_normal())).collect();
        let mean = draws.iter().sum::<f64>() / n as f64;
        let var = draws.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        assert!((mean - inc.mean(&p, dc.x_star)).abs() < 3.0 * inc.sd / (n as f64).sqrt());
        assert!((var / (inc.sd * inc.sd) - 1.0).abs() < 0.05);
    }

    #[test]
    fn bridge_probability() {
        let p = p0();
        assert_eq!(crossing_probability(1.0, 1.0, 1.0, 1e-3, 0.05, &p).unwrap(), 1.0);
        let (eps, h): (f64, f64) = (0.05, 1e-3);
        let x = 1.0 - eps * h.sqrt();
        let v = crossing_probability(x, x, 1.0, h, eps, &p).unwrap();
        assert!((v - (-2.0f64).exp()).abs() < 1e-12);
        assert!((v - 0.1353).abs() < 1e-4);
        assert!(crossing_probability(0.5, 0.5, 1.0, h, eps, &p).unwrap() < 1e-300);
        assert!(crossing_probability(1.01, 0.9, 1.0, h, eps, &p).is_err());
    }

    #[test]
    fn quadratic_variation_clock() {
        let p = p0();
        assert_eq!(time_change(&p, 0.0), 0.0);
        assert!((time_change(&p, 1.0) - (std::f64::consts::E - 1.0)).abs() < 1e-12);
        for &t in &[0.5, 1.0, 5.0] {
            assert!((time_change_inverse(&p, time_change(&p, t)) - t).abs() < 1e-12);
        }
        assert!(time_change(&p, 0.3) < time_change(&p, 0.31));
    }

    #[test]
    fn config_checks() {
        let p = p0();
        let z0 = HybridState::on(0.5);
        let bad = StochConfig { dt: 0.003, ..Default::default() };
        assert!(matches!(simulate_stoch(&p, z0, &bad), Err(Error::Config(_))));
        let bad = StochConfig { epsilon: -0.1, ..Default::default() };
        assert!(simulate_stoch(&p, z0, &bad).is_err());
        assert!(simulate_stoch(&p, HybridState::off(0.5), &StochConfig::default()).is_err());
    }

    #[test]
    fn reproducible_paths() {
        let p = p0();
        let z0 = HybridState::on(0.6);
        let cfg = StochConfig { epsilon: 0.1, seed: 99, ..Default::default() };
        let a = simulate_replica(&p, z0, &cfg, 3).unwrap();
        let b = simulate_replica(&p, z0, &cfg, 3).unwrap();
        assert_eq!(a, b);
        let c = simulate_replica(&p, z0, &cfg, 4).unwrap();
        assert_ne!(a.schedule(), c.schedule());
    }

    #[test]
    fn schedule_sanity() {
        let p = p0();
        let dc = derive_constants(&p).unwrap();
        let cfg = StochConfig { epsilon: 0.2, seed: 1, ..Default::default() };
        let paths = simulate_ensemble(&p, HybridState::on(dc.x_star), &cfg, 200).unwrap();
        for path in &paths {
            let mut prev_sigma = 0.0;
            for c in &path.schedule().cycles {
                assert_eq!(c.start, prev_sigma);
                if let Some(tau) = c.tau {
                    assert!(tau > c.start);
                    let sigma = c.sigma.unwrap();
                    assert_eq!(sigma, tau.floor() + 1.0);
                    assert_eq!(path.eval(tau).unwrap(), HybridState::off(p.x_ref));
                    prev_sigma = sigma;
                }
            }
            for t in path.schedule().jump_times() {
                let l = path.eval_left_unchecked(t);
                let r = path.eval_unchecked(t);
                assert!((l.x - r.x).abs() < 1e-12);
                assert_ne!(l.mode, r.mode);
            }
        }
    }

    #[test]
    fn zero_noise_matches_deterministic_schedule() {
        let p = p0();
        for &x0 in &[0.2, 0.5, 0.95] {
            let det = simulate_det(&p, HybridState::on(x0), 20).unwrap();
            let cfg = StochConfig { epsilon: 0.0, horizon: 20, ..Default::default() };
            let st = simulate_stoch(&p, HybridState::on(x0), &cfg).unwrap();
            let taus = st.schedule().taus();
            assert_eq!(taus.len(), det.schedule().t.len());
            for (a, b) in taus.iter().zip(&det.schedule().t) {
                assert!((a - b).abs() <= cfg.dt, "{a} vs {b}");
            }
            assert_eq!(st.schedule().sigmas(), det.schedule().s);
            // pointwise: bounded by the flow speed times dt
            let speed = det.x_lipschitz();
            for k in 0..20_000 {
                let t = k as f64 * 1e-3;
                let (a, b) = (st.eval(t).unwrap(), det.eval(t).unwrap());
                if a.mode == b.mode {
                    assert!((a.x - b.x).abs() <= speed * cfg.dt, "t={t}");
                }
            }
        }
    }

    #[test]
    fn truncated_on_phase_has_no_passage() {
        let p = p0();
        // from 0.02 the ON phase lasts longer than one period
        let cfg = StochConfig { epsilon: 0.01, horizon: 1, ..Default::default() };
        let st = simulate_stoch(&p, HybridState::on(0.02), &cfg).unwrap();
        let last = st.schedule().cycles.last().unwrap();
        assert_eq!(last.tau, None);
        assert_eq!(st.eval(1.0).unwrap().mode, Mode::On);
        assert_eq!(st.grid_samples().len(), 1001);
    }

    #[test]
    fn interpolation_hits_samples() {
        let p = p0();
        let cfg = StochConfig { epsilon: 0.1, horizon: 3, seed: 8, ..Default::default() };
        let st = simulate_stoch(&p, HybridState::on(0.7), &cfg).unwrap();
        if let StochSegment::On { start, samples, .. } = &st.segments()[0] {
            for (i, &x) in samples.iter().enumerate().step_by(17) {
                let t = start + i as f64 * st.dt();
                assert!((st.eval(t).unwrap().x - x).abs() < 1e-12);
            }
        } else {
            panic!("first segment must be ON");
        }
        assert!(st.x_lipschitz() > 0.0);
    }
}
