fn main() {
    std::process::exit(adaptive_oco::cli::parse_and_dispatch(std::env::args_os()));
}
