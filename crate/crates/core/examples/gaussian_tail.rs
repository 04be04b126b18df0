// The normal tail next to its integration-by-parts bound.

use buck_flln::flln::{gaussian_tail, tail_upper_bound};

pub fn run_example() -> buck_flln::Result<()> {
    for i in 0..=10 {
        let x = 1.0 + 0.5 * i as f64;
        println!("x = {x:3.1}  T(x) = {:.6e}  bound = {:.6e}", gaussian_tail(x)?, tail_upper_bound(x));
    }
    println!("T(1.959964) = {:.9}", gaussian_tail(1.959964)?);
    Ok(())
}

#[allow(dead_code)]
fn main() -> buck_flln::Result<()> {
    run_example()
}
