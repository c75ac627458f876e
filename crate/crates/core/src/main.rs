fn main() {
    std::process::exit(bridgelab::cli::run(std::env::args_os()));
}
