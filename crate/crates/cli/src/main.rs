fn main() {
    std::process::exit(cosmowave_cli::run(std::env::args_os()));
}
