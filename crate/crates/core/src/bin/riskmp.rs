fn main() {
    std::process::exit(riskmp::cli::run(std::env::args_os()));
}
