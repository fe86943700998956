fn main() {
    std::process::exit(usc_harness::cli::main_with_args(std::env::args_os()));
}
