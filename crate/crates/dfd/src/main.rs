fn main() {
    std::process::exit(dfd::cli::run(std::env::args_os()));
}
