// Noisy switching: passage times of a few replicas against the deterministic schedule.

use buck_flln::sde::simulate_ensemble;
use buck_flln::{derive_constants, ConverterParams, HybridState, StochConfig};

pub fn run_example() -> buck_flln::Result<()> {
    let p = ConverterParams::reference();
    let dc = derive_constants(&p)?;
    let z0 = HybridState::on(dc.x_star);

    for eps in [0.0, 0.02, 0.1] {
        let cfg = StochConfig { epsilon: eps, horizon: 5, seed: 7, ..Default::default() };
        let paths = simulate_ensemble(&p, z0, &cfg, 4)?;
        println!("epsilon = {eps}");
        for path in &paths {
            let devs: Vec<String> = path
                .schedule()
                .taus()
                .iter()
                .enumerate()
                .map(|(n, tau)| format!("{:+.4}", tau - n as f64 - dc.t_star))
                .collect();
            println!(
                "  replica {}  tau_n - t_n: [{}]  slow passages: {}",
                path.replica(),
                devs.join(", "),
                path.schedule().slow_passages()
            );
        }
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> buck_flln::Result<()> {
    run_example()
}
