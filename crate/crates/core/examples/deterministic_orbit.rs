// Deterministic hybrid trajectory: convergence onto the period-1 orbit.

use buck_flln::{derive_constants, simulate_det, ConverterParams, HybridState};

pub fn run_example() -> buck_flln::Result<()> {
    let p = ConverterParams::reference();
    let dc = derive_constants(&p)?;

    let path = simulate_det(&p, HybridState::on(0.3), 12)?;
    let sched = path.schedule();
    println!("from x0 = 0.3:");
    for (n, (t, s)) in sched.t.iter().zip(&sched.s).enumerate() {
        println!(
            "  n = {:>2}  t_n = {t:.9}  s_n = {s}  on-time - t* = {:+.3e}",
            n + 1,
            t - (n as f64) - dc.t_star
        );
    }

    let orbit = simulate_det(&p, HybridState::on(dc.x_star), 3)?;
    for (t, x, y) in orbit.sample(0.125)? {
        println!("  t = {t:5.3}  x = {x:.6}  y = {y}");
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> buck_flln::Result<()> {
    run_example()
}
