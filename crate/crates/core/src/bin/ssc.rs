fn main() {
    std::process::exit(greedy_ssc::harness::cli::run_cli(std::env::args_os()));
}
