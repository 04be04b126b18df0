// Skorokhod bounds for a path whose switch-off is delayed: the uniform
// metric sees a mode mismatch, a time deformation does not.

use buck_flln::det::DetPath;
use buck_flln::skorokhod::{paper_lambda, sk_bruteforce, sk_upper_bound, uniform_distance};
use buck_flln::{derive_constants, ConverterParams};

pub fn run_example() -> buck_flln::Result<()> {
    let p = ConverterParams::reference();
    let dc = derive_constants(&p)?;
    let z = DetPath::periodic_orbit(&p, &dc, 2)?;
    let t = z.schedule().t.clone();

    for shift in [0.02, 0.05] {
        let w = DetPath::with_switch_times(&p, z.initial_state(), &[t[0] + shift, t[1] - shift], 2)?;
        let uniform = uniform_distance(&z, &w, 1e-3)?;
        let lam = paper_lambda(z.schedule(), &w.schedule().t, &w.schedule().s, 2.0)
            .expect("same switching pattern");
        let aligned = sk_upper_bound(&z, &w, &lam, 1e-3)?;
        let brute = sk_bruteforce(&z, &w, 9, 9, 1e-3)?;
        println!("shift {shift}:");
        for b in [uniform, aligned, brute.bound] {
            println!(
                "  {:<13} gamma = {:.5}  sup r = {:.5}  bound = {:.5}",
                b.method.as_str(),
                b.gamma,
                b.sup_r,
                b.bound
            );
        }
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> buck_flln::Result<()> {
    run_example()
}
