//! Command-line front end.
//!
//! Configuration is a flat `key = value` file with section prefixes:
//!
//! ```text
//! # model constants (a `params.` prefix is optional)
//! alpha_on = 0.5
//! alpha_off = 0.6
//! beta = 1.2
//! x_ref = 1.0
//! seed = 42
//! sde.epsilon = 0.05
//! mc.epsilons = 0.1, 0.05, 0.02
//! ```
//!
//! `--set key=value` overrides the file and `--seed` overrides both.
//! Unknown keys are rejected.
//!
//! | subcommand     | files written                                           |
//! |----------------|---------------------------------------------------------|
//! | `validate`     | `derived_constants.txt`, `derived_constants.json`       |
//! | `strobe`       | `cobweb.csv` (`iter,x`), `fixed_point.txt`              |
//! | `simulate-det` | `det_trajectory.csv` (`t,x,y`), `det_schedule.csv` (`n,t_n,s_n`) |
//! | `simulate-sde` | `sde_schedule.csv` (`replica,n,tau_n,sigma_n`), optional `sde_trajectory.csv` (`replica,t,x,y`) |
//! | `distance`     | `distance.csv` (`gamma,sup_r,bound,slack,method`)       |
//! | `mc-sweep`     | `mc_report.csv`, `mc_summary.json`                      |
//!
//! Exit codes: 0 ok, 2 configuration or I/O error, 3 invalid parameters or
//! domain error, 4 internal error.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Parser, Subcommand};

use crate::det::{simulate_det, DetPath};
use crate::error::{Error, Result};
use crate::flln::{sweep, McConfig};
use crate::output::{atomic_write, fmt_float, fmt_opt, Csv};
use crate::params::{derive_constants, ConverterParams};
use crate::sde::{simulate_replica, StochConfig};
use crate::skorokhod::{paper_lambda_for, sk_bruteforce, sk_upper_bound, uniform_distance, DistanceBound};
use crate::state::{HybridState, Mode};
use crate::strobe::cobweb;

#[derive(Debug, Parser)]
#[command(name = "buck-flln", version, about = "Buck converter switching dynamics: simulation and bound checks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Flat key = value configuration file.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, value_name = "DIR", default_value = ".")]
    pub out: PathBuf,
    #[arg(long, global = true, value_name = "N")]
    pub seed: Option<u64>,
    /// Override one configuration key; repeatable.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    pub set: Vec<String>,
    #[arg(long, global = true)]
    pub quiet: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Check the admissibility inequalities and print the derived constants.
    Validate,
    /// Fixed point of the stroboscopic map and a cobweb table.
    Strobe,
    /// Deterministic trajectory and switching schedule.
    SimulateDet,
    /// Stochastic replicas and their switching schedules.
    SimulateSde,
    /// Skorokhod distance bounds between the deterministic path and one replica.
    Distance,
    /// Monte Carlo sweep over noise levels.
    McSweep,
}

const KEYS: &[&str] = &[
    "params.alpha_on",
    "params.alpha_off",
    "params.beta",
    "params.x_ref",
    "seed",
    "det.x0",
    "det.y0",
    "det.horizon",
    "det.step",
    "strobe.x0",
    "strobe.iters",
    "sde.epsilon",
    "sde.dt",
    "sde.horizon",
    "sde.x0",
    "sde.replicas",
    "sde.bridge",
    "sde.trajectories",
    "distance.replica",
    "distance.step",
    "distance.bruteforce",
    "distance.k",
    "distance.m",
    "mc.epsilons",
    "mc.nu",
    "mc.varsigma",
    "mc.frak_t",
    "mc.p",
    "mc.replicas",
    "mc.dt",
    "mc.bridge",
    "mc.sup_step",
];

/// Merged configuration keys.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Settings {
    map: BTreeMap<String, String>,
}

fn normalize(key: &str) -> Result<String> {
    let key = key.trim();
    let key = match key {
        "alpha_on" | "alpha_off" | "beta" | "x_ref" => format!("params.{key}"),
        _ => key.to_string(),
    };
    if KEYS.contains(&key.as_str()) {
        Ok(key)
    } else {
        Err(Error::config(format!("unknown configuration key `{key}`")))
    }
}

fn parse_bool(s: &str) -> Option<bool> {
    match s {
        "true" | "1" | "yes" | "on" => Some(true),
        "false" | "0" | "no" | "off" => Some(false),
        _ => None,
    }
}

impl Settings {
    pub fn parse(text: &str) -> Result<Self> {
        let mut s = Self::default();
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                return Err(Error::config(format!("line {}: expected `key = value`", i + 1)));
            };
            s.set(k, v)?;
        }
        Ok(s)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        self.map.insert(normalize(key)?, value.trim().to_string());
        Ok(())
    }

    /// `KEY=VALUE` form.
    pub fn apply_override(&mut self, kv: &str) -> Result<()> {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| Error::config(format!("override `{kv}` is not KEY=VALUE")))?;
        self.set(k, v)
    }

    fn get<T: FromStr>(&self, key: &str, default: T) -> Result<T> {
        Ok(self.get_opt(key)?.unwrap_or(default))
    }

    fn get_opt<T: FromStr>(&self, key: &str) -> Result<Option<T>> {
        debug_assert!(KEYS.contains(&key));
        self.map
            .get(key)
            .map(|v| {
                v.parse()
                    .map_err(|_| Error::config(format!("cannot parse `{key}` value `{v}`")))
            })
            .transpose()
    }

    fn get_bool(&self, key: &str, default: bool) -> Result<bool> {
        match self.map.get(key) {
            None => Ok(default),
            Some(v) => parse_bool(v).ok_or_else(|| Error::config(format!("`{key}` expects a boolean, got `{v}`"))),
        }
    }

    pub fn params(&self) -> Result<ConverterParams> {
        let p0 = ConverterParams::reference();
        Ok(ConverterParams::new(
            self.get("params.alpha_on", p0.alpha_on)?,
            self.get("params.alpha_off", p0.alpha_off)?,
            self.get("params.beta", p0.beta)?,
            self.get("params.x_ref", p0.x_ref)?,
        ))
    }

    pub fn seed(&self) -> Result<u64> {
        self.get("seed", 42)
    }

    pub fn stoch(&self) -> Result<StochConfig> {
        let d = StochConfig::default();
        Ok(StochConfig {
            epsilon: self.get("sde.epsilon", d.epsilon)?,
            dt: self.get("sde.dt", d.dt)?,
            horizon: self.get("sde.horizon", d.horizon)?,
            seed: self.seed()?,
            bridge_correction: self.get_bool("sde.bridge", d.bridge_correction)?,
        })
    }

    pub fn mc(&self) -> Result<McConfig> {
        let d = McConfig::default();
        let epsilons = match self.map.get("mc.epsilons") {
            None => d.epsilons,
            Some(v) if v.trim().is_empty() => Vec::new(),
            Some(v) => v
                .split(',')
                .map(|e| {
                    e.trim()
                        .parse()
                        .map_err(|_| Error::config(format!("cannot parse epsilon `{e}` in mc.epsilons")))
                })
                .collect::<Result<_>>()?,
        };
        Ok(McConfig {
            params: self.params()?,
            epsilons,
            nu: self.get("mc.nu", d.nu)?,
            varsigma: self.get("mc.varsigma", d.varsigma)?,
            frak_t: self.get("mc.frak_t", d.frak_t)?,
            p: self.get("mc.p", d.p)?,
            replicas: self.get("mc.replicas", d.replicas)?,
            seed: self.seed()?,
            dt: self.get("mc.dt", d.dt)?,
            bridge: self.get_bool("mc.bridge", d.bridge)?,
            sup_step: self.get("mc.sup_step", d.sup_step)?,
        })
    }
}

/// Reads the config file and applies `--set` and `--seed`, in that order.
pub fn load_settings(cli: &Cli) -> Result<Settings> {
    let mut s = match &cli.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| Error::config(format!("cannot read config {}: {e}", path.display())))?;
            Settings::parse(&text)?
        }
        None => Settings::default(),
    };
    for kv in &cli.set {
        s.apply_override(kv)?;
    }
    if let Some(seed) = cli.seed {
        s.set("seed", &seed.to_string())?;
    }
    Ok(s)
}

/// Runs one subcommand and returns the one-line summary.
pub fn run(cli: &Cli) -> Result<String> {
    let s = load_settings(cli)?;
    let out = cli.out.as_path();
    let verbose = !cli.quiet;
    match cli.command {
        Command::Validate => validate(&s, out, verbose),
        Command::Strobe => strobe(&s, out),
        Command::SimulateDet => simulate_det_cmd(&s, out),
        Command::SimulateSde => simulate_sde_cmd(&s, out),
        Command::Distance => distance(&s, out, verbose),
        Command::McSweep => mc_sweep(&s, out, verbose),
    }
}

/// Parses `args` (program name first), runs, reports and returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match run(&cli) {
        Ok(summary) => {
            if !cli.quiet {
                println!("{summary}");
            }
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn write(out: &Path, name: &str, contents: &str) -> Result<()> {
    atomic_write(&out.join(name), contents.as_bytes())
}

fn validate(s: &Settings, out: &Path, verbose: bool) -> Result<String> {
    let p = s.params()?;
    let dc = derive_constants(&p)?;
    let mut txt = String::new();
    for (k, v) in dc.entries() {
        let _ = writeln!(txt, "{k} = {}", fmt_float(v));
    }
    let json = serde_json::json!({ "params": p, "derived": dc });
    write(out, "derived_constants.txt", &txt)?;
    write(out, "derived_constants.json", &(serde_json::to_string_pretty(&json).expect("serializable") + "\n"))?;
    if verbose {
        print!("{txt}");
    }
    Ok(format!("parameters admissible; x_star = {:.6}, t_star = {:.6}, K = {:.6}", dc.x_star, dc.t_star, dc.k))
}

fn strobe(s: &Settings, out: &Path) -> Result<String> {
    let p = s.params()?;
    let dc = derive_constants(&p)?;
    let x0 = s.get("strobe.x0", 0.1)?;
    let iters = s.get("strobe.iters", 50usize)?;
    let xs = cobweb(&p, x0, iters)?;
    let mut csv = Csv::new(&["iter", "x"]);
    for (i, x) in xs.iter().enumerate() {
        csv.row(vec![i.to_string(), fmt_float(*x)]);
    }
    write(out, "cobweb.csv", &csv.finish())?;
    let txt = format!(
        "x_star = {}\nf_prime_at_star = {}\nx_border = {}\n",
        fmt_float(dc.x_star),
        fmt_float(dc.f_prime_at_star),
        fmt_float(dc.x_border)
    );
    write(out, "fixed_point.txt", &txt)?;
    Ok(format!(
        "x_star = {:.9}, f'(x_star) = {:.6}, x_border = {:.6}; {} iterates from {x0}",
        dc.x_star, dc.f_prime_at_star, dc.x_border, iters
    ))
}

fn initial_state(s: &Settings, prefix: &str, x_star: f64) -> Result<HybridState> {
    let x0 = s.get(&format!("{prefix}.x0"), x_star)?;
    let mode = if prefix == "det" {
        let y: u8 = s.get("det.y0", 1)?;
        Mode::from_y(y).ok_or_else(|| Error::config(format!("det.y0 = {y} must be 0 or 1")))?
    } else {
        Mode::On
    };
    Ok(HybridState::new(x0, mode))
}

fn simulate_det_cmd(s: &Settings, out: &Path) -> Result<String> {
    let p = s.params()?;
    let dc = derive_constants(&p)?;
    let z0 = initial_state(s, "det", dc.x_star)?;
    let horizon = s.get("det.horizon", 10u32)?;
    let step = s.get("det.step", 1e-3)?;
    let path = simulate_det(&p, z0, horizon)?;

    let mut traj = Csv::new(&["t", "x", "y"]);
    for (t, x, y) in path.sample(step)? {
        traj.row(vec![fmt_float(t), fmt_float(x), y.to_string()]);
    }
    let mut sched = Csv::new(&["n", "t_n", "s_n"]);
    let sc = path.schedule();
    for (i, t) in sc.t.iter().enumerate() {
        sched.row(vec![(i + 1).to_string(), fmt_float(*t), fmt_opt(sc.s.get(i).copied())]);
    }
    write(out, "det_trajectory.csv", &traj.finish())?;
    write(out, "det_schedule.csv", &sched.finish())?;
    Ok(format!("deterministic path on [0, {horizon}]: {} switch-offs", sc.t.len()))
}

fn simulate_sde_cmd(s: &Settings, out: &Path) -> Result<String> {
    let p = s.params()?;
    let dc = derive_constants(&p)?;
    let z0 = initial_state(s, "sde", dc.x_star)?;
    let cfg = s.stoch()?;
    let replicas = s.get("sde.replicas", 1u64)?;
    let trajectories = s.get_bool("sde.trajectories", false)?;
    let paths = crate::sde::simulate_ensemble(&p, z0, &cfg, replicas)?;

    let mut sched = Csv::new(&["replica", "n", "tau_n", "sigma_n"]);
    let mut traj = Csv::new(&["replica", "t", "x", "y"]);
    let mut slow = 0;
    for path in &paths {
        let sc = path.schedule();
        slow += sc.slow_passages();
        for (i, c) in sc.cycles.iter().enumerate() {
            let sigma = c.sigma.filter(|&v| v <= sc.horizon);
            sched.row(vec![path.replica().to_string(), (i + 1).to_string(), fmt_opt(c.tau), fmt_opt(sigma)]);
        }
        if trajectories {
            for (t, x, y) in path.grid_samples() {
                traj.row(vec![path.replica().to_string(), fmt_float(t), fmt_float(x), y.to_string()]);
            }
        }
    }
    write(out, "sde_schedule.csv", &sched.finish())?;
    if trajectories {
        write(out, "sde_trajectory.csv", &traj.finish())?;
    }
    Ok(format!(
        "{replicas} replicas at epsilon = {} on [0, {}]; {slow} slow passages",
        cfg.epsilon, cfg.horizon
    ))
}

fn distance(s: &Settings, out: &Path, verbose: bool) -> Result<String> {
    let p = s.params()?;
    let dc = derive_constants(&p)?;
    let z0 = initial_state(s, "sde", dc.x_star)?;
    let cfg = s.stoch()?;
    let replica = s.get("distance.replica", 0u64)?;
    let step = s.get("distance.step", 1e-3)?;
    let det: DetPath = simulate_det(&p, z0, cfg.horizon)?;
    let stoch = simulate_replica(&p, z0, &cfg, replica)?;

    let mut bounds: Vec<DistanceBound> = vec![uniform_distance(&det, &stoch, step)?];
    if let Some(lam) = paper_lambda_for(det.schedule(), stoch.schedule()) {
        bounds.push(sk_upper_bound(&det, &stoch, &lam, step)?);
    }
    if s.get_bool("distance.bruteforce", false)? {
        let k = s.get("distance.k", 11usize)?;
        let m = s.get("distance.m", 11usize)?;
        bounds.push(sk_bruteforce(&det, &stoch, k, m, step)?.bound);
    }
    let mut csv = Csv::new(&["gamma", "sup_r", "bound", "slack", "method"]);
    for b in &bounds {
        csv.row(vec![
            fmt_float(b.gamma),
            fmt_float(b.sup_r),
            fmt_float(b.bound),
            fmt_float(b.slack),
            b.method.as_str().to_string(),
        ]);
    }
    let text = csv.finish();
    write(out, "distance.csv", &text)?;
    if verbose {
        print!("{text}");
    }
    let best = bounds.iter().map(|b| b.bound).fold(f64::INFINITY, f64::min);
    Ok(format!("replica {replica} at epsilon = {}: d <= {best:.6}", cfg.epsilon))
}

fn mc_sweep(s: &Settings, out: &Path, verbose: bool) -> Result<String> {
    let cfg = s.mc()?;
    let report = sweep(&cfg)?;
    write(out, "mc_report.csv", &report.to_csv())?;
    write(out, "mc_summary.json", &report.summary_json())?;
    if verbose {
        for r in &report.rows {
            println!(
                "epsilon = {:<8} T = {:<4} delta = {:.5}  P(bad) = {:.4}  bound = {:.4}  E[d^p] = {:.5} +- {:.5}",
                r.bad.epsilon,
                r.bad.horizon,
                r.bad.delta,
                r.bad.bad_total() as f64 / r.bad.replicas.max(1) as f64,
                r.bad.bound,
                r.moment.dp_moment,
                r.moment.dp_se
            );
        }
    }
    let summary = report.summary();
    Ok(format!(
        "{} noise levels x {} replicas; bound checks {}",
        report.rows.len(),
        cfg.replicas,
        if summary.all_passed { "passed" } else { "FAILED" }
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_override() {
        let mut s = Settings::parse("# comment\nalpha_on = 0.5\nparams.beta=1.25 # trailing\n\nsde.epsilon = 0.1\n").unwrap();
        assert_eq!(s.params().unwrap().beta, 1.25);
        s.apply_override("beta=0.9").unwrap();
        assert_eq!(s.params().unwrap().beta, 0.9);
        assert_eq!(s.stoch().unwrap().epsilon, 0.1);
        assert!(Settings::parse("bogus = 1").is_err());
        assert!(Settings::parse("alpha_on 0.5").is_err());
        assert!(Settings::parse("sde.bridge = maybe").unwrap().stoch().is_err());
    }

    #[test]
    fn epsilon_lists() {
        let s = Settings::parse("mc.epsilons = 0.1, 0.05,0.02").unwrap();
        assert_eq!(s.mc().unwrap().epsilons, vec![0.1, 0.05, 0.02]);
        let s = Settings::parse("mc.epsilons =").unwrap();
        assert!(s.mc().unwrap().epsilons.is_empty());
        assert!(Settings::parse("mc.epsilons = 0.1, x").unwrap().mc().is_err());
    }
}
