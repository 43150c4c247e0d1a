fn main() {
    std::process::exit(bse_bench::cli::cli_main());
}
