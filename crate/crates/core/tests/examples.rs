macro_rules! example {
    ($module:ident, $file:literal) => {
        #[allow(dead_code)]
        mod $module {
            include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/", $file));
        }
    };
}

example!(validate_params, "validate_params.rs");
example!(strobe_fixed_point, "strobe_fixed_point.rs");
example!(deterministic_orbit, "deterministic_orbit.rs");
example!(stochastic_switching, "stochastic_switching.rs");
example!(skorokhod_distance, "skorokhod_distance.rs");
example!(gaussian_tail, "gaussian_tail.rs");
example!(bad_event_bounds, "bad_event_bounds.rs");
example!(flln_sweep, "flln_sweep.rs");

#[test]
fn examples_run() {
    validate_params::run_example().unwrap();
    strobe_fixed_point::run_example().unwrap();
    deterministic_orbit::run_example().unwrap();
    stochastic_switching::run_example().unwrap();
    skorokhod_distance::run_example().unwrap();
    gaussian_tail::run_example().unwrap();
}

#[test]
fn monte_carlo_examples_run() {
    bad_event_bounds::run_example().unwrap();
    flln_sweep::run_example().unwrap();
}
