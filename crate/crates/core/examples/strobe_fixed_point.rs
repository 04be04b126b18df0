// Stroboscopic map: the stable fixed point and a cobweb from the smooth branch.

use buck_flln::params::x_border;
use buck_flln::strobe::{branch, cobweb, find_fixed_point, strobe_f};
use buck_flln::ConverterParams;

pub fn run_example() -> buck_flln::Result<()> {
    let p = ConverterParams::reference();
    let (x_star, fp) = find_fixed_point(&p)?;
    println!("x_border = {:.6}", x_border(&p));
    println!("x*       = {x_star:.12}  f'(x*) = {fp:.6}");

    for x in [0.0, 0.05, 0.2, 0.5, 1.0] {
        println!("f({x:.2}) = {:.6}  {:?}", strobe_f(&p, x)?, branch(&p, x));
    }

    let orbit = cobweb(&p, 0.1, 30)?;
    for (i, x) in orbit.iter().enumerate().step_by(5) {
        println!("iter {i:>2}  x = {x:.12}  |x - x*| = {:.3e}", (x - x_star).abs());
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> buck_flln::Result<()> {
    run_example()
}
