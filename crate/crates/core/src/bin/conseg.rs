fn main() {
    std::process::exit(conseg::cli::run(std::env::args_os()));
}
