fn main() {
    std::process::exit(primesums::cli::run(std::env::args_os()));
}
