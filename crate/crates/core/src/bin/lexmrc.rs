fn main() {
    std::process::exit(lexmrc::cli::run(std::env::args_os()));
}
