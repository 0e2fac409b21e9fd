fn main() {
    std::process::exit(photonic_kondo::cli::run(std::env::args_os()));
}
