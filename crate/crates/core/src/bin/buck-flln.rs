fn main() {
    std::process::exit(buck_flln::cli::main_with_args(std::env::args_os()));
}
