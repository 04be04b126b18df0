//! Closed-form deterministic hybrid trajectory.
//!
//! A path is stored as a list of ON/OFF segments, each carrying its start
//! time and start value, so evaluation at any `t` is exact up to rounding.

use crate::error::{Error, Result};
use crate::params::{validate_params, ConverterParams, DerivedConstants};
use crate::state::{HybridState, Mode};

/// Switch times within this distance of an integer are treated as lying on
/// the clock pulse, so the boundary orbit from `x_border` gets `s_1 = 2`.
pub const INTEGER_SNAP: f64 = 1e-9;

/// ON flow from `x0` after `dt`.
pub fn on_flow(p: &ConverterParams, x0: f64, dt: f64) -> f64 {
    let eq = p.on_equilibrium();
    eq + (x0 - eq) * (-p.alpha_on * dt).exp()
}

/// OFF flow from `x_ref` after `dt`.
pub fn off_flow(p: &ConverterParams, dt: f64) -> f64 {
    p.x_ref * (-p.alpha_off * dt).exp()
}

/// Time for the ON flow to carry `x0` up to `x_ref`. Zero when `x0 >= x_ref`.
pub fn on_hit_time(p: &ConverterParams, x0: f64) -> Result<f64> {
    let eq = p.on_equilibrium();
    if x0 >= eq {
        return Err(Error::domain(format!(
            "x0 = {x0} is at or above the ON equilibrium {eq}; threshold never reached from below"
        )));
    }
    if x0 >= p.x_ref {
        return Ok(0.0);
    }
    Ok(((eq - x0) / (eq - p.x_ref)).ln() / p.alpha_on)
}

/// Next clock pulse strictly after `t`.
pub fn next_pulse(t: f64) -> f64 {
    t.floor() + 1.0
}

fn snap_to_integer(t: f64) -> f64 {
    let r = t.round();
    if (t - r).abs() <= INTEGER_SNAP * r.abs().max(1.0) {
        r
    } else {
        t
    }
}

/// One piece of a hybrid trajectory on `[start, end)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub start: f64,
    pub end: f64,
    pub mode: Mode,
    pub x_start: f64,
}

impl Segment {
    pub fn x_at(&self, p: &ConverterParams, t: f64) -> f64 {
        let dt = t - self.start;
        match self.mode {
            Mode::On => on_flow(p, self.x_start, dt),
            Mode::Off => self.x_start * (-p.alpha_off * dt).exp(),
        }
    }

    fn max_speed(&self, p: &ConverterParams) -> f64 {
        match self.mode {
            Mode::On => {
                let a = (p.beta - p.alpha_on * self.x_start).abs();
                let b = (p.beta - p.alpha_on * self.x_at(p, self.end)).abs();
                a.max(b)
            }
            Mode::Off => p.alpha_off * self.x_start.abs(),
        }
    }
}

/// Switching times of a deterministic path within its horizon.
#[derive(Debug, Clone, PartialEq)]
pub struct DetSchedule {
    /// Start of the first ON phase: 0, or 1 when starting OFF.
    pub s0: f64,
    /// ON -> OFF times `t_1 < t_2 < ...` up to the horizon.
    pub t: Vec<f64>,
    /// OFF -> ON clock times `s_1 < s_2 < ...` up to the horizon.
    pub s: Vec<f64>,
    pub horizon: f64,
}

impl DetSchedule {
    /// Mode-switch times in increasing order.
    pub fn jump_times(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.t.len() + self.s.len() + 1);
        if self.s0 > 0.0 && self.s0 <= self.horizon {
            out.push(self.s0);
        }
        for (i, &t) in self.t.iter().enumerate() {
            out.push(t);
            if let Some(&s) = self.s.get(i) {
                out.push(s);
            }
        }
        out
    }

    /// Number of ON/OFF cycles completed by the horizon.
    pub fn complete_cycles(&self) -> usize {
        self.s.len()
    }
}

#[derive(Debug, Clone)]
pub struct DetPath {
    params: ConverterParams,
    z0: HybridState,
    schedule: DetSchedule,
    segments: Vec<Segment>,
}

/// Deterministic trajectory from `z0` on `[0, horizon]`.
///
/// `z0` is `(x0, On)` with `x0` in `(0, x_ref)`, or `(x0, Off)` with `x0` in
/// `(0, x_ref]`, in which case the system decays until the pulse at `t = 1`.
pub fn simulate_det(p: &ConverterParams, z0: HybridState, horizon: u32) -> Result<DetPath> {
    DetPath::build(p, z0, horizon, true, |_, start, x| {
        Ok(snap_to_integer(start + on_hit_time(p, x)?))
    })
}

impl DetPath {
    /// Path whose ON -> OFF switches happen at prescribed times instead of
    /// at threshold crossings. `x` stays continuous; OFF -> ON still follows
    /// the clock.
    pub fn with_switch_times(
        p: &ConverterParams,
        z0: HybridState,
        switch_times: &[f64],
        horizon: u32,
    ) -> Result<DetPath> {
        DetPath::forced(p, z0, switch_times, horizon, false)
    }

    fn forced(
        p: &ConverterParams,
        z0: HybridState,
        switch_times: &[f64],
        horizon: u32,
        at_threshold: bool,
    ) -> Result<DetPath> {
        DetPath::build(p, z0, horizon, at_threshold, |n, start, _| match switch_times.get(n) {
            Some(&t) if t > start => Ok(t),
            Some(&t) => Err(Error::domain(format!(
                "switch time {t} does not follow cycle start {start}"
            ))),
            None => Ok(f64::INFINITY),
        })
    }

    /// The period-1 orbit from `(x*, 1)` with `t_n = n - 1 + t*`, `s_n = n`.
    pub fn periodic_orbit(p: &ConverterParams, dc: &DerivedConstants, horizon: u32) -> Result<DetPath> {
        let times: Vec<f64> = (0..horizon).map(|n| n as f64 + dc.t_star).collect();
        DetPath::forced(p, HybridState::on(dc.x_star), &times, horizon, true)
    }

    fn build(
        p: &ConverterParams,
        z0: HybridState,
        horizon: u32,
        at_threshold: bool,
        mut switch_time: impl FnMut(usize, f64, f64) -> Result<f64>,
    ) -> Result<DetPath> {
        validate_params(p)?;
        let end = horizon as f64;
        let mut segments = Vec::new();
        let mut t_list = Vec::new();
        let mut s_list = Vec::new();

        let (s0, mut start, mut x) = match z0.mode {
            Mode::On => {
                if !(z0.x > 0.0 && z0.x < p.x_ref) {
                    return Err(Error::domain(format!(
                        "initial ON state x0 = {} outside (0, x_ref)",
                        z0.x
                    )));
                }
                (0.0, 0.0, z0.x)
            }
            Mode::Off => {
                if !(z0.x > 0.0 && z0.x <= p.x_ref) {
                    return Err(Error::domain(format!(
                        "initial OFF state x0 = {} outside (0, x_ref]",
                        z0.x
                    )));
                }
                let seg = Segment { start: 0.0, end: end.min(1.0), mode: Mode::Off, x_start: z0.x };
                if end > 0.0 {
                    segments.push(seg);
                }
                let x1 = seg.x_at(p, 1.0);
                (1.0, 1.0, x1)
            }
        };

        while start < end {
            let t_n = switch_time(t_list.len(), start, x)?;
            if t_n > end {
                segments.push(Segment { start, end, mode: Mode::On, x_start: x });
                break;
            }
            segments.push(Segment { start, end: t_n, mode: Mode::On, x_start: x });
            let x_switch = if at_threshold {
                p.x_ref
            } else {
                segments.last().unwrap().x_at(p, t_n)
            };
            t_list.push(t_n);
            let s_n = next_pulse(t_n);
            let off = Segment { start: t_n, end: s_n.min(end), mode: Mode::Off, x_start: x_switch };
            segments.push(off);
            if s_n > end {
                break;
            }
            s_list.push(s_n);
            x = off.x_at(p, s_n);
            start = s_n;
        }
        if start == end && segments.last().is_some_and(|s| s.mode == Mode::Off) {
            segments.push(Segment { start: end, end, mode: Mode::On, x_start: x });
        }

        Ok(DetPath {
            params: *p,
            z0,
            schedule: DetSchedule { s0, t: t_list, s: s_list, horizon: end },
            segments,
        })
    }

    pub fn params(&self) -> &ConverterParams {
        &self.params
    }

    pub fn initial_state(&self) -> HybridState {
        self.z0
    }

    pub fn schedule(&self) -> &DetSchedule {
        &self.schedule
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn horizon(&self) -> f64 {
        self.schedule.horizon
    }

    /// Right-continuous evaluation.
    pub fn eval(&self, t: f64) -> Result<HybridState> {
        self.check_time(t)?;
        Ok(self.eval_unchecked(t))
    }

    /// Left limit at `t`; equals `eval(0)` at `t = 0`.
    pub fn eval_left(&self, t: f64) -> Result<HybridState> {
        self.check_time(t)?;
        Ok(self.eval_left_unchecked(t))
    }

    fn check_time(&self, t: f64) -> Result<()> {
        if !(0.0..=self.horizon()).contains(&t) {
            return Err(Error::domain(format!(
                "t = {t} outside [0, {}]",
                self.horizon()
            )));
        }
        Ok(())
    }

    pub(crate) fn eval_unchecked(&self, t: f64) -> HybridState {
        let i = self.segments.partition_point(|s| s.start <= t);
        self.state_in(i.checked_sub(1), t)
    }

    pub(crate) fn eval_left_unchecked(&self, t: f64) -> HybridState {
        if t <= 0.0 {
            return self.eval_unchecked(0.0);
        }
        let i = self.segments.partition_point(|s| s.start < t);
        self.state_in(i.checked_sub(1), t)
    }

    fn state_in(&self, idx: Option<usize>, t: f64) -> HybridState {
        match idx {
            Some(i) => {
                let seg = &self.segments[i];
                HybridState::new(seg.x_at(&self.params, t), seg.mode)
            }
            None => self.z0,
        }
    }

    /// Largest `|dx/dt|` along the path.
    pub fn x_lipschitz(&self) -> f64 {
        self.segments
            .iter()
            .map(|s| s.max_speed(&self.params))
            .fold(0.0, f64::max)
    }

    /// `(t, x, y)` on the grid `0, step, 2 step, ...`, ending exactly at the horizon.
    pub fn sample(&self, step: f64) -> Result<Vec<(f64, f64, u8)>> {
        if !(step > 0.0 && step.is_finite()) {
            return Err(Error::config(format!("sampling step {step} must be positive")));
        }
        Ok(sample_times(self.horizon(), step)
            .into_iter()
            .map(|t| {
                let z = self.eval_unchecked(t);
                (t, z.x, z.y())
            })
            .collect())
    }
}

/// `0, step, 2 step, ...` up to `horizon`, with the horizon itself appended.
pub(crate) fn sample_times(horizon: f64, step: f64) -> Vec<f64> {
    let n = (horizon / step).round() as usize;
    let mut times: Vec<f64> = (0..=n).map(|i| i as f64 * step).filter(|&t| t < horizon).collect();
    times.push(horizon);
    times
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::{derive_constants, x_border};
    use crate::strobe::strobe_f;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn p0() -> ConverterParams {
        ConverterParams::reference()
    }

    #[test]
    fn flows() {
        let p = p0();
        let dc = derive_constants(&p).unwrap();
        assert_eq!(on_flow(&p, dc.x_star, 0.0), dc.x_star);
        assert!((on_flow(&p, dc.x_star, 1e3) - 2.4).abs() < 1e-12);
        assert!((on_flow(&p, dc.x_star, dc.t_star) - 1.0).abs() < 1e-9);
        assert!(on_flow(&p, 0.3, 0.2) < on_flow(&p, 0.3, 0.21));

        assert_eq!(off_flow(&p, 0.0), p.x_ref);
        assert!((off_flow(&p, 1.0 - dc.t_star) - dc.x_star).abs() < 1e-9);
        assert!((off_flow(&p, std::f64::consts::LN_2 / p.alpha_off) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn hit_times() {
        let p = p0();
        let dc = derive_constants(&p).unwrap();
        assert!((on_hit_time(&p, dc.x_star).unwrap() - 0.3938).abs() < 2e-3);
        assert_eq!(on_hit_time(&p, 1.0).unwrap(), 0.0);
        assert!((on_hit_time(&p, x_border(&p)).unwrap() - 1.0).abs() < 1e-9);
        assert!(on_hit_time(&p, 2.4).is_err());
        assert!(on_hit_time(&p, 3.0).is_err());
    }

    #[test]
    fn periodic_schedule() {
        let p = p0();
        let dc = derive_constants(&p).unwrap();
        let path = simulate_det(&p, HybridState::on(dc.x_star), 5).unwrap();
        let sch = path.schedule();
        assert_eq!(sch.t.len(), 5);
        assert_eq!(sch.s, vec![1.0, 2.0, 3.0, 4.0, 5.0]);
        for (n, &t) in sch.t.iter().enumerate() {
            assert!((t - n as f64 - dc.t_star).abs() < 1e-9);
        }
    }

    #[test]
    fn boundary_orbit_skips_the_coincident_pulse() {
        let p = p0();
        let path = simulate_det(&p, HybridState::on(x_border(&p)), 2).unwrap();
        assert_eq!(path.schedule().t, vec![1.0]);
        assert_eq!(path.schedule().s, vec![2.0]);
    }

    #[test]
    fn long_on_phase_ignores_pulses() {
        let p = p0();
        // below x_border the ON phase lasts more than one period
        let path = simulate_det(&p, HybridState::on(0.02), 4).unwrap();
        let sch = path.schedule();
        assert!(sch.t[0] > 1.0 && sch.t[0] < 2.0);
        assert_eq!(sch.s[0], 2.0);
        assert_eq!(path.eval(1.0).unwrap().mode, Mode::On);
    }

    #[test]
    fn zero_horizon() {
        let p = p0();
        let dc = derive_constants(&p).unwrap();
        let z0 = HybridState::on(dc.x_star);
        let path = simulate_det(&p, z0, 0).unwrap();
        assert!(path.schedule().t.is_empty() && path.schedule().s.is_empty());
        assert_eq!(path.eval(0.0).unwrap(), z0);
        assert!(path.eval(0.1).is_err());
    }

    #[test]
    fn bad_initial_states() {
        let p = p0();
        assert!(simulate_det(&p, HybridState::on(0.0), 3).is_err());
        assert!(simulate_det(&p, HybridState::on(1.0), 3).is_err());
        assert!(simulate_det(&p, HybridState::off(1.5), 3).is_err());
    }

    #[test]
    fn evaluation_conventions() {
        let p = p0();
        let dc = derive_constants(&p).unwrap();
        let path = simulate_det(&p, HybridState::on(dc.x_star), 10).unwrap();
        assert_eq!(path.eval(0.0).unwrap(), HybridState::on(dc.x_star));
        let t3 = path.schedule().t[2];
        let at = path.eval(t3).unwrap();
        assert_eq!(at.mode, Mode::Off);
        assert_eq!(at.x, p.x_ref);
        let left = path.eval_left(t3).unwrap();
        assert_eq!(left.mode, Mode::On);
        for n in 1..=10 {
            let z = path.eval(n as f64).unwrap();
            assert_eq!(z.mode, Mode::On);
            assert!((z.x - dc.x_star).abs() < 1e-9);
        }
        assert!(path.eval(10.0 + 1e-9).is_err());
        assert!(path.eval(-1e-9).is_err());
    }

    #[test]
    fn continuity_at_switches() {
        let p = p0();
        let path = simulate_det(&p, HybridState::on(0.3), 20).unwrap();
        for t in path.schedule().jump_times() {
            let l = path.eval_left(t).unwrap();
            let r = path.eval(t).unwrap();
            assert!((l.x - r.x).abs() <= 1e-12, "t={t}");
            assert_ne!(l.mode, r.mode);
        }
    }

    #[test]
    fn periodicity_on_dense_grid() {
        let p = p0();
        let dc = derive_constants(&p).unwrap();
        let path = simulate_det(&p, HybridState::on(dc.x_star), 100).unwrap();
        let mut worst: f64 = 0.0;
        for i in 0..99_000 {
            let t = i as f64 * 1e-3;
            let a = path.eval(t).unwrap();
            let b = path.eval(t + 1.0).unwrap();
            worst = worst.max((a.x - b.x).abs());
        }
        assert!(worst <= 1e-9, "{worst}");
    }

    #[test]
    fn integer_times_follow_the_strobe_map() {
        let p = p0();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let x0 = rng.random_range(1e-3..p.x_ref);
            let path = simulate_det(&p, HybridState::on(x0), 15).unwrap();
            let mut x = x0;
            for n in 1..=15 {
                x = strobe_f(&p, x).unwrap();
                assert!((path.eval(n as f64).unwrap().x - x).abs() < 1e-10, "x0={x0} n={n}");
            }
        }
    }

    #[test]
    fn on_occupancy_matches_schedule() {
        let p = p0();
        let path = simulate_det(&p, HybridState::on(0.45), 12).unwrap();
        let sch = path.schedule();
        let on_len: f64 = path
            .segments()
            .iter()
            .filter(|s| s.mode == Mode::On)
            .map(|s| s.end - s.start)
            .sum();
        let mut starts = vec![0.0];
        starts.extend(&sch.s);
        let expected: f64 = sch.t.iter().zip(&starts).map(|(t, s)| t - s).sum();
        assert!((on_len - expected).abs() < 1e-12);
    }

    #[test]
    fn off_start() {
        let p = p0();
        let path = simulate_det(&p, HybridState::off(0.8), 3).unwrap();
        assert_eq!(path.schedule().s0, 1.0);
        assert_eq!(path.eval(0.5).unwrap().mode, Mode::Off);
        assert!((path.eval(1.0).unwrap().x - 0.8 * (-0.6f64).exp()).abs() < 1e-15);
        assert_eq!(path.eval(1.0).unwrap().mode, Mode::On);
        assert_eq!(path.schedule().jump_times()[0], 1.0);
    }

    #[test]
    fn sampling_grid() {
        let p = p0();
        let path = simulate_det(&p, HybridState::on(0.5), 2).unwrap();
        let rows = path.sample(1e-3).unwrap();
        assert_eq!(rows.len(), 2001);
        assert_eq!(rows.last().unwrap().0, 2.0);
    }
}
