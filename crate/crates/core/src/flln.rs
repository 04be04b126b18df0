//! Monte Carlo checks of the small-noise limit: bad-event frequencies
//! against Gaussian tail bounds and moments of certified Skorokhod bounds.
//!
//! Every run starts from `(x*, ON)` and compares against the period-1 orbit
//! `t_n = n - 1 + t*`, `s_n = n`. For a tolerance `delta`, replica `omega`
//! is in `B_n` when cycle `n` is the first with `|tau_n - t_n| > delta`
//! (or with no passage at all before the horizon).

use std::f64::consts::{PI, SQRT_2};

use rayon::prelude::*;
use serde::Serialize;

use crate::det::DetPath;
use crate::error::{Error, Result};
use crate::params::{derive_constants, ConverterParams, DerivedConstants};
use crate::sde::{simulate_replica, StochConfig, StochPath};
use crate::skorokhod::{modes_aligned, paper_lambda_for, sk_upper_bound, uniform_distance, DEFAULT_SUP_STEP};
use crate::state::HybridState;

/// Two-sided 95% normal quantile used for Wilson intervals.
pub const WILSON_Z: f64 = 1.959963984540054;
/// Standard errors of slack allowed when comparing a frequency to a bound.
pub const DOMINANCE_SE: f64 = 3.0;

/// `P(N(0,1) > x)`.
pub fn gaussian_tail(x: f64) -> Result<f64> {
    if !(x >= 0.0) {
        return Err(Error::domain(format!("gaussian tail needs x >= 0, got {x}")));
    }
    Ok(0.5 * libm::erfc(x / SQRT_2))
}

/// `3 / sqrt(2 pi) x^2 e^{-x^2/2}`, an upper bound on the tail for `x >= 1`.
pub fn tail_upper_bound(x: f64) -> f64 {
    3.0 / (2.0 * PI).sqrt() * x * x * (-0.5 * x * x).exp()
}

/// Wilson score interval for `k` successes out of `n`.
pub fn wilson_interval(k: u64, n: u64, z: f64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let n = n as f64;
    let p = k as f64 / n;
    let z2 = z * z;
    let centre = (p + z2 / (2.0 * n)) / (1.0 + z2 / n);
    let half = z / (1.0 + z2 / n) * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

fn binomial_se(k: u64, n: u64) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let p = k as f64 / n as f64;
    (p * (1.0 - p) / n as f64).sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct McConfig {
    pub params: ConverterParams,
    pub epsilons: Vec<f64>,
    /// Horizon growth exponent, `T_eps = floor(frak_t / eps^nu)`.
    pub nu: f64,
    /// Tolerance exponent, `delta = eps^varsigma`.
    pub varsigma: f64,
    pub frak_t: u32,
    /// Moment order.
    pub p: f64,
    pub replicas: u64,
    pub seed: u64,
    pub dt: f64,
    pub bridge: bool,
    /// Sup-grid spacing for the distance bounds.
    pub sup_step: f64,
}

impl Default for McConfig {
    fn default() -> Self {
        Self {
            params: ConverterParams::reference(),
            epsilons: vec![0.1, 0.05, 0.02],
            nu: 0.0,
            varsigma: 0.8,
            frak_t: 10,
            p: 1.0,
            replicas: 1000,
            seed: 42,
            dt: 1e-3,
            bridge: true,
            sup_step: DEFAULT_SUP_STEP,
        }
    }
}

impl McConfig {
    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if !(0.0..2.0 / 3.0).contains(&self.nu) {
            return Err(Error::config(format!("nu = {} must lie in [0, 2/3)", self.nu)));
        }
        if !(self.varsigma > self.nu && self.varsigma < 1.0) {
            return Err(Error::config(format!(
                "varsigma = {} must lie in (nu, 1) with nu = {}",
                self.varsigma, self.nu
            )));
        }
        if self.frak_t < 1 {
            return Err(Error::config("frak_t must be at least 1"));
        }
        if !(self.p >= 1.0 && self.p.is_finite()) {
            return Err(Error::config(format!("moment order p = {} must be >= 1", self.p)));
        }
        if !(self.sup_step > 0.0 && self.sup_step <= 1e-3) {
            return Err(Error::config(format!("sup_step = {} must lie in (0, 1e-3]", self.sup_step)));
        }
        if let Some(&e) = self.epsilons.iter().find(|e| !(**e >= 0.0 && e.is_finite())) {
            return Err(Error::config(format!("epsilon = {e} must be finite and >= 0")));
        }
        self.stoch(0.0).validate()
    }

    pub fn horizon(&self, eps: f64) -> u32 {
        if eps == 0.0 {
            return self.frak_t;
        }
        ((self.frak_t as f64 / eps.powf(self.nu)).floor() as u32).max(1)
    }

    pub fn delta(&self, eps: f64) -> f64 {
        eps.powf(self.varsigma)
    }

    fn stoch(&self, eps: f64) -> StochConfig {
        StochConfig {
            epsilon: eps,
            dt: self.dt,
            horizon: self.horizon(eps),
            seed: self.seed,
            bridge_correction: self.bridge,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Side {
    /// `tau_n < t_n - delta`
    Early,
    /// `tau_n > t_n + delta`, or no passage before the horizon
    Late,
}

/// Per-replica result.
#[derive(Debug, Clone, PartialEq)]
pub struct ReplicaOutcome {
    /// First bad cycle (1-based) and the side of the miss.
    pub first_bad: Option<(usize, Side)>,
    pub slow_passages: usize,
    pub distance: Option<DistanceOutcome>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistanceOutcome {
    /// Smaller of the aligned and the uniform bound.
    pub bound: f64,
    pub gamma: Option<f64>,
    pub aligned: Option<bool>,
}

/// First `n` with `|tau_n - t_n| > delta`.
pub fn first_bad_cycle(det: &DetPath, stoch: &StochPath, delta: f64) -> Option<(usize, Side)> {
    let cycles = &stoch.schedule().cycles;
    for (i, &t) in det.schedule().t.iter().enumerate() {
        match cycles.get(i).and_then(|c| c.tau) {
            Some(tau) if (tau - t).abs() <= delta => {}
            Some(tau) if tau < t => return Some((i + 1, Side::Early)),
            _ => return Some((i + 1, Side::Late)),
        }
    }
    None
}

fn replica_outcome(
    det: &DetPath,
    stoch: &StochPath,
    delta: f64,
    sup_step: f64,
    with_distance: bool,
) -> Result<ReplicaOutcome> {
    let first_bad = first_bad_cycle(det, stoch, delta);
    let distance = if with_distance {
        let uniform = uniform_distance(det, stoch, sup_step)?;
        let mut out = DistanceOutcome { bound: uniform.bound, gamma: None, aligned: None };
        if let Some(lam) = paper_lambda_for(det.schedule(), stoch.schedule()) {
            let b = sk_upper_bound(det, stoch, &lam, sup_step)?;
            out.bound = out.bound.min(b.bound);
            out.gamma = Some(b.gamma);
            out.aligned = Some(modes_aligned(det, stoch, &lam, sup_step));
        }
        Some(out)
    } else {
        None
    };
    Ok(ReplicaOutcome { first_bad, slow_passages: stoch.schedule().slow_passages(), distance })
}

/// Replicas `0..cfg.replicas` at noise level `eps`, in replica order.
/// Replica `k` uses stream `k` of the base seed for every `eps`.
pub fn run_ensemble(cfg: &McConfig, dc: &DerivedConstants, eps: f64, with_distance: bool) -> Result<Vec<ReplicaOutcome>> {
    let horizon = cfg.horizon(eps);
    let det = DetPath::periodic_orbit(&cfg.params, dc, horizon)?;
    if eps == 0.0 {
        let zero = ReplicaOutcome {
            first_bad: None,
            slow_passages: 0,
            distance: with_distance.then_some(DistanceOutcome { bound: 0.0, gamma: Some(0.0), aligned: Some(true) }),
        };
        return Ok(vec![zero; cfg.replicas as usize]);
    }
    let stoch_cfg = cfg.stoch(eps);
    let delta = cfg.delta(eps);
    let z0 = HybridState::on(dc.x_star);
    (0..cfg.replicas)
        .into_par_iter()
        .map(|k| {
            let path = simulate_replica(&cfg.params, z0, &stoch_cfg, k)?;
            replica_outcome(&det, &path, delta, cfg.sup_step, with_distance)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BadEventStats {
    pub epsilon: f64,
    pub horizon: u32,
    pub delta: f64,
    pub replicas: u64,
    /// `delta < delta_plus`; otherwise the late-side bound is not guaranteed.
    pub delta_below_delta_plus: bool,
    /// `counts[n - 1]` replicas in `B_n`.
    pub counts: Vec<u64>,
    pub counts_early: Vec<u64>,
    pub counts_late: Vec<u64>,
    pub good: u64,
    /// `3 T(K delta / eps)`
    pub bound: f64,
    /// `2 T(K_- delta / eps)`
    pub bound_early: f64,
    /// `T(K_+ delta / eps)`
    pub bound_late: f64,
    pub slow_passages: u64,
}

impl BadEventStats {
    fn from_outcomes(cfg: &McConfig, dc: &DerivedConstants, eps: f64, outcomes: &[ReplicaOutcome]) -> Result<Self> {
        let horizon = cfg.horizon(eps);
        let delta = cfg.delta(eps);
        let n = horizon as usize;
        let mut counts = vec![0; n];
        let mut counts_early = vec![0; n];
        let mut counts_late = vec![0; n];
        let mut good = 0;
        let mut slow = 0;
        for o in outcomes {
            slow += o.slow_passages as u64;
            match o.first_bad {
                None => good += 1,
                Some((k, side)) => {
                    counts[k - 1] += 1;
                    match side {
                        Side::Early => counts_early[k - 1] += 1,
                        Side::Late => counts_late[k - 1] += 1,
                    }
                }
            }
        }
        let arg = |k: f64| if eps == 0.0 { f64::INFINITY } else { k * delta / eps };
        Ok(Self {
            epsilon: eps,
            horizon,
            delta,
            replicas: outcomes.len() as u64,
            delta_below_delta_plus: delta < dc.delta_plus,
            counts,
            counts_early,
            counts_late,
            good,
            bound: 3.0 * gaussian_tail(arg(dc.k))?,
            bound_early: 2.0 * gaussian_tail(arg(dc.k_minus))?,
            bound_late: gaussian_tail(arg(dc.k_plus))?,
            slow_passages: slow,
        })
    }

    pub fn freq(&self, n: usize) -> f64 {
        self.counts[n - 1] as f64 / self.replicas.max(1) as f64
    }

    pub fn se(&self, n: usize) -> f64 {
        binomial_se(self.counts[n - 1], self.replicas)
    }

    pub fn bad_total(&self) -> u64 {
        self.replicas - self.good
    }

    fn dominated(counts: &[u64], replicas: u64, bound: f64) -> bool {
        counts.iter().all(|&k| {
            k as f64 / replicas.max(1) as f64 <= bound + DOMINANCE_SE * binomial_se(k, replicas)
        })
    }

    /// `freq(B_n) <= 3 T(K delta / eps) + 3 SE` for every `n`.
    pub fn bound_dominance(&self) -> bool {
        Self::dominated(&self.counts, self.replicas, self.bound)
    }

    pub fn early_dominance(&self) -> bool {
        Self::dominated(&self.counts_early, self.replicas, self.bound_early)
    }

    pub fn late_dominance(&self) -> bool {
        Self::dominated(&self.counts_late, self.replicas, self.bound_late)
    }

    /// The first bad cycle is unique per replica, so the `B_n` partition the
    /// complement of the good event.
    pub fn decomposition_holds(&self) -> bool {
        self.counts.iter().sum::<u64>() == self.bad_total()
            && self.counts_early.iter().sum::<u64>() + self.counts_late.iter().sum::<u64>() == self.bad_total()
    }
}

/// Empirical `P(B_n)` at noise level `eps` next to the tail bounds.
pub fn bad_event_probs(cfg: &McConfig, dc: &DerivedConstants, eps: f64) -> Result<BadEventStats> {
    cfg.validate()?;
    let outcomes = run_ensemble(cfg, dc, eps, false)?;
    BadEventStats::from_outcomes(cfg, dc, eps, &outcomes)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentStats {
    pub epsilon: f64,
    pub horizon: u32,
    pub replicas: u64,
    pub p: f64,
    pub d_mean: f64,
    pub dp_moment: f64,
    pub dp_se: f64,
    pub d_q50: f64,
    pub d_q90: f64,
    pub d_q99: f64,
    /// Replicas where the aligning deformation exists.
    pub aligned_replicas: u64,
    /// Replicas where modes disagree under the aligning deformation.
    pub misaligned: u64,
    /// Good-event replicas on which the distortion lemma applies.
    pub gamma_checked: u64,
    pub gamma_violations: u64,
}

fn quantile(sorted: &[f64], q: f64) -> f64 {
    if sorted.is_empty() {
        return 0.0;
    }
    let i = ((q * sorted.len() as f64).ceil() as usize).clamp(1, sorted.len()) - 1;
    sorted[i]
}

impl MomentStats {
    fn from_outcomes(cfg: &McConfig, dc: &DerivedConstants, eps: f64, outcomes: &[ReplicaOutcome]) -> Self {
        let horizon = cfg.horizon(eps);
        let delta = cfg.delta(eps);
        let lemma_applies = delta <= dc.t_min / (4.0 * horizon as f64);
        let gamma_cap = 4.0 * horizon as f64 * delta / dc.t_min;
        let mut d = Vec::with_capacity(outcomes.len());
        let (mut aligned_replicas, mut misaligned, mut gamma_checked, mut gamma_violations) = (0, 0, 0, 0);
        for o in outcomes {
            let dist = o.distance.expect("ensemble run with distances");
            d.push(dist.bound);
            if let Some(a) = dist.aligned {
                aligned_replicas += 1;
                if o.first_bad.is_none() && !a {
                    misaligned += 1;
                }
            }
            if lemma_applies && o.first_bad.is_none() {
                gamma_checked += 1;
                if dist.gamma.is_none_or(|g| g > gamma_cap) {
                    gamma_violations += 1;
                }
            }
        }
        let r = d.len().max(1) as f64;
        let dp: Vec<f64> = d.iter().map(|v| v.powf(cfg.p)).collect();
        let d_mean = d.iter().sum::<f64>() / r;
        let dp_moment = dp.iter().sum::<f64>() / r;
        let var = if d.len() > 1 {
            dp.iter().map(|v| (v - dp_moment).powi(2)).sum::<f64>() / (r - 1.0)
        } else {
            0.0
        };
        let mut sorted = d.clone();
        sorted.sort_by(f64::total_cmp);
        Self {
            epsilon: eps,
            horizon,
            replicas: d.len() as u64,
            p: cfg.p,
            d_mean,
            dp_moment,
            dp_se: (var / r).sqrt(),
            d_q50: quantile(&sorted, 0.5),
            d_q90: quantile(&sorted, 0.9),
            d_q99: quantile(&sorted, 0.99),
            aligned_replicas,
            misaligned,
            gamma_checked,
            gamma_violations,
        }
    }
}

/// Estimate of `E[d^p]` through per-path certified upper bounds.
pub fn distance_moment(cfg: &McConfig, dc: &DerivedConstants, eps: f64) -> Result<MomentStats> {
    cfg.validate()?;
    let outcomes = run_ensemble(cfg, dc, eps, true)?;
    Ok(MomentStats::from_outcomes(cfg, dc, eps, &outcomes))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EpsRow {
    pub bad: BadEventStats,
    pub moment: MomentStats,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct McReport {
    pub config: McConfig,
    pub constants: DerivedConstants,
    pub rows: Vec<EpsRow>,
}

/// Bad events and distance moments for every epsilon of the config.
pub fn sweep(cfg: &McConfig) -> Result<McReport> {
    cfg.validate()?;
    let dc = derive_constants(&cfg.params)?;
    let mut rows = Vec::with_capacity(cfg.epsilons.len());
    for &eps in &cfg.epsilons {
        let outcomes = run_ensemble(cfg, &dc, eps, true)?;
        rows.push(EpsRow {
            bad: BadEventStats::from_outcomes(cfg, &dc, eps, &outcomes)?,
            moment: MomentStats::from_outcomes(cfg, &dc, eps, &outcomes),
        });
    }
    Ok(McReport { config: cfg.clone(), constants: dc, rows })
}

pub const REPORT_COLUMNS: [&str; 13] = [
    "epsilon",
    "T_eps",
    "delta",
    "n",
    "emp_prob",
    "wilson_lo",
    "wilson_hi",
    "bound",
    "emp_d_mean",
    "emp_dp_moment",
    "dp_se",
    "good_freq",
    "anomalies",
];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EpsChecks {
    pub epsilon: f64,
    pub bound_dominance: bool,
    pub early_dominance: bool,
    pub late_dominance: bool,
    /// `false` when `delta >= delta_plus`: the late bound is then not guaranteed.
    pub late_bound_guaranteed: bool,
    pub decomposition: bool,
    pub gamma_lemma: bool,
    pub mode_alignment: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct McSummary<'a> {
    pub config: &'a McConfig,
    pub constants: &'a DerivedConstants,
    pub rows: &'a [EpsRow],
    pub checks: Vec<EpsChecks>,
    /// `E[d^p]` estimates strictly decrease along the epsilon list when it
    /// is sorted in decreasing order; `None` otherwise.
    pub moment_decreasing: Option<bool>,
    pub all_passed: bool,
}

impl McReport {
    pub fn checks(&self) -> Vec<EpsChecks> {
        self.rows
            .iter()
            .map(|r| EpsChecks {
                epsilon: r.bad.epsilon,
                bound_dominance: r.bad.bound_dominance(),
                early_dominance: r.bad.early_dominance(),
                late_dominance: r.bad.late_dominance(),
                late_bound_guaranteed: r.bad.delta_below_delta_plus,
                decomposition: r.bad.decomposition_holds(),
                gamma_lemma: r.moment.gamma_violations == 0,
                mode_alignment: r.moment.misaligned == 0,
            })
            .collect()
    }

    pub fn moment_decreasing(&self) -> Option<bool> {
        let eps: Vec<f64> = self.rows.iter().map(|r| r.bad.epsilon).collect();
        if eps.len() < 2 || !eps.windows(2).all(|w| w[0] > w[1]) {
            return None;
        }
        Some(self.rows.windows(2).all(|w| w[1].moment.dp_moment < w[0].moment.dp_moment))
    }

    pub fn summary(&self) -> McSummary<'_> {
        let checks = self.checks();
        let moment_decreasing = self.moment_decreasing();
        let all_passed = moment_decreasing != Some(false)
            && checks.iter().all(|c| {
                c.bound_dominance
                    && c.early_dominance
                    && (c.late_dominance || !c.late_bound_guaranteed)
                    && c.decomposition
                    && c.gamma_lemma
                    && c.mode_alignment
            });
        McSummary {
            config: &self.config,
            constants: &self.constants,
            rows: &self.rows,
            checks,
            moment_decreasing,
            all_passed,
        }
    }

    /// One row per `(epsilon, n)` plus a pooled `n = all` row whose bound is
    /// the union bound `T_eps * 3 T(K delta / eps)`.
    pub fn to_csv(&self) -> String {
        use crate::output::{fmt_float, Csv};
        let mut csv = Csv::new(&REPORT_COLUMNS);
        for r in &self.rows {
            let b = &r.bad;
            let m = &r.moment;
            let good_freq = b.good as f64 / b.replicas.max(1) as f64;
            let mut row = |n: String, k: u64, bound: f64| {
                let (lo, hi) = wilson_interval(k, b.replicas, WILSON_Z);
                csv.row(vec![
                    fmt_float(b.epsilon),
                    b.horizon.to_string(),
                    fmt_float(b.delta),
                    n,
                    fmt_float(k as f64 / b.replicas.max(1) as f64),
                    fmt_float(lo),
                    fmt_float(hi),
                    fmt_float(bound),
                    fmt_float(m.d_mean),
                    fmt_float(m.dp_moment),
                    fmt_float(m.dp_se),
                    fmt_float(good_freq),
                    b.slow_passages.to_string(),
                ]);
            };
            for (i, &k) in b.counts.iter().enumerate() {
                row((i + 1).to_string(), k, b.bound);
            }
            row("all".into(), b.bad_total(), b.horizon as f64 * b.bound);
        }
        csv.finish()
    }

    pub fn summary_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.summary()).expect("report serializes");
        s.push('\n');
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    // Composite Simpson on [x, x + 40], independent of erfc.
    fn tail_by_quadrature(x: f64) -> f64 {
        let n = 400_000;
        let h = 40.0 / n as f64;
        let g = |t: f64| (-0.5 * t * t).exp();
        let mut s = g(x) + g(x + 40.0);
        for i in 1..n {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            s += w * g(x + i as f64 * h);
        }
        s * h / 3.0 / (2.0 * PI).sqrt()
    }

    #[test]
    fn tail_values() {
        assert_eq!(gaussian_tail(0.0).unwrap(), 0.5);
        assert!((gaussian_tail(1.959964).unwrap() - 0.025).abs() < 1e-6);
        assert!(gaussian_tail(-0.1).is_err());
        for i in 0..=16 {
            let x = 0.5 * i as f64;
            let oracle = tail_by_quadrature(x);
            let rel = (gaussian_tail(x).unwrap() - oracle).abs() / oracle;
            assert!(rel < 1e-12, "x={x} rel={rel}");
        }
    }

    #[test]
    fn tail_bound_grid() {
        for i in 0..=10 {
            let x = 1.0 + 0.5 * i as f64;
            assert!(gaussian_tail(x).unwrap() <= tail_upper_bound(x));
        }
    }

    #[test]
    fn wilson_edges() {
        let (lo, hi) = wilson_interval(0, 100, WILSON_Z);
        assert!(lo < 1e-15);
        assert!(hi > 0.0 && hi < 0.05);
        let (lo, hi) = wilson_interval(50, 100, WILSON_Z);
        assert!(lo < 0.5 && hi > 0.5 && (0.5 - lo - (hi - 0.5)).abs() < 1e-12);
    }

    #[test]
    fn config_checks() {
        let cfg = McConfig::default();
        cfg.validate().unwrap();
        assert!(McConfig { nu: 0.7, ..cfg.clone() }.validate().is_err());
        assert!(McConfig { varsigma: 0.0, ..cfg.clone() }.validate().is_err());
        assert!(McConfig { dt: 0.003, ..cfg.clone() }.validate().is_err());
        let cfg = McConfig { nu: 0.3, frak_t: 4, varsigma: 0.6, ..cfg };
        assert_eq!(cfg.horizon(1.0), 4);
        assert_eq!(cfg.horizon(0.02), 12);
        assert_eq!(cfg.horizon(0.0), 4);
    }

    #[test]
    fn zero_noise_is_exact() {
        let cfg = McConfig { epsilons: vec![0.0], replicas: 20, ..McConfig::default() };
        let report = sweep(&cfg).unwrap();
        let r = &report.rows[0];
        assert!(r.bad.counts.iter().all(|&c| c == 0));
        assert_eq!(r.bad.good, 20);
        assert_eq!(r.bad.bound, 0.0);
        assert_eq!(r.moment.dp_moment, 0.0);
    }

    #[test]
    fn empty_and_singleton_sweeps() {
        let cfg = McConfig { epsilons: vec![], ..McConfig::default() };
        let report = sweep(&cfg).unwrap();
        assert!(report.rows.is_empty());
        assert_eq!(report.to_csv().lines().count(), 1);

        let cfg = McConfig { epsilons: vec![0.1], replicas: 16, frak_t: 3, ..McConfig::default() };
        let report = sweep(&cfg).unwrap();
        assert_eq!(report.rows.len(), 1);
        // three cycles plus the pooled row
        assert_eq!(report.to_csv().lines().count(), 1 + 3 + 1);
        let b = &report.rows[0].bad;
        assert!(b.decomposition_holds());
        let dc = derive_constants(&cfg.params).unwrap();
        let expected = 3.0 * gaussian_tail(dc.k * cfg.delta(0.1) / 0.1).unwrap();
        assert_eq!(b.bound, expected);
    }
}
