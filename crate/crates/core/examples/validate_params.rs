// Admissibility check and derived constants for the reference set and a
// few perturbations of it.

use buck_flln::{derive_constants, validate_params, ConverterParams};

pub fn run_example() -> buck_flln::Result<()> {
    let p0 = ConverterParams::reference();
    let dc = derive_constants(&p0)?;
    println!("reference set {p0:?}");
    for (k, v) in dc.entries() {
        println!("  {k:<16} {v:.9}");
    }

    let cases = [
        ("beta = 0.9", ConverterParams { beta: 0.9, ..p0 }),
        ("beta = 1.3", ConverterParams { beta: 1.3, ..p0 }),
        ("alpha_off = 0.45", ConverterParams { alpha_off: 0.45, ..p0 }),
        ("alpha_off = 0.75", ConverterParams { alpha_off: 0.75, ..p0 }),
        ("alpha_on = 0.8", ConverterParams { alpha_on: 0.8, ..p0 }),
        ("x_ref = 2.5", ConverterParams { x_ref: 2.5, ..p0 }),
        ("x_ref = 0", ConverterParams { x_ref: 0.0, ..p0 }),
    ];
    for (label, p) in cases {
        match validate_params(&p) {
            Ok(()) => println!("{label:<18} ok"),
            Err(e) => println!("{label:<18} {e}"),
        }
    }

    // 12 V across a 10 H inductor, 5 ohm load, 1 ohm diode
    let p = ConverterParams::from_circuit(12.0, 5.0, 1.0, 10.0, 1.0);
    println!("from circuit values: {p:?}");
    Ok(())
}

#[allow(dead_code)]
fn main() -> buck_flln::Result<()> {
    run_example()
}
