// Noise-level sweep: bad events and the first moment of the certified
// Skorokhod bound, written as the CSV report.
//
// `cargo run --release --example flln_sweep -- [replicas] [nu varsigma frak_t]`

use buck_flln::flln::sweep;
use buck_flln::McConfig;

pub fn run_with(cfg: &McConfig) -> buck_flln::Result<()> {
    let report = sweep(cfg)?;
    for r in &report.rows {
        println!(
            "eps = {:<5} T = {:<3} E[d] <= {:.5} +- {:.5}  q90 = {:.5}  good = {}/{}",
            r.bad.epsilon,
            r.bad.horizon,
            r.moment.d_mean,
            r.moment.dp_se,
            r.moment.d_q90,
            r.bad.good,
            r.bad.replicas
        );
    }
    println!("moment decreasing: {:?}", report.moment_decreasing());
    print!("{}", report.to_csv());
    Ok(())
}

pub fn run_example() -> buck_flln::Result<()> {
    run_with(&McConfig { replicas: 40, frak_t: 4, ..McConfig::default() })
}

#[allow(dead_code)]
fn main() -> buck_flln::Result<()> {
    let args: Vec<f64> = std::env::args().skip(1).map(|a| a.parse().expect("number")).collect();
    let mut cfg = McConfig::default();
    if let Some(&r) = args.first() {
        cfg.replicas = r as u64;
    }
    if args.len() == 4 {
        cfg.nu = args[1];
        cfg.varsigma = args[2];
        cfg.frak_t = args[3] as u32;
    }
    run_with(&cfg)
}
