fn main() {
    std::process::exit(benchlab::cli::run(std::env::args_os()));
}
