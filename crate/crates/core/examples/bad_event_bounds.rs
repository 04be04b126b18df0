// Frequencies of the first late or early switch-off against the tail bounds.
//
// `cargo run --release --example bad_event_bounds -- [replicas] [eps...]`

use buck_flln::flln::bad_event_probs;
use buck_flln::{derive_constants, McConfig};

pub fn run_with(replicas: u64, epsilons: &[f64]) -> buck_flln::Result<()> {
    let cfg = McConfig { replicas, ..McConfig::default() };
    let dc = derive_constants(&cfg.params)?;
    println!("K- = {:.5}  K+ = {:.5}  delta+ = {:.5}", dc.k_minus, dc.k_plus, dc.delta_plus);
    for &eps in epsilons {
        let s = bad_event_probs(&cfg, &dc, eps)?;
        println!(
            "eps = {eps}  delta = {:.5}  good = {}/{}  bound 3T(K d/e) = {:.4}  early 2T = {:.4}  late T = {:.4}",
            s.delta, s.good, s.replicas, s.bound, s.bound_early, s.bound_late
        );
        for n in 1..=s.counts.len() {
            println!(
                "  n = {n:>2}  P(B_n) = {:.5} +- {:.5}  (early {}, late {})",
                s.freq(n),
                s.se(n),
                s.counts_early[n - 1],
                s.counts_late[n - 1]
            );
        }
        println!(
            "  dominance {}  early {}  late {}",
            s.bound_dominance(),
            s.early_dominance(),
            s.late_dominance()
        );
    }
    Ok(())
}

pub fn run_example() -> buck_flln::Result<()> {
    run_with(200, &[0.05])
}

#[allow(dead_code)]
fn main() -> buck_flln::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    if args.is_empty() {
        return run_example();
    }
    let replicas = args[0].parse().expect("replica count");
    let eps: Vec<f64> = args[1..].iter().map(|a| a.parse().expect("epsilon")).collect();
    run_with(replicas, if eps.is_empty() { &[0.05, 0.01, 0.002] } else { &eps })
}
