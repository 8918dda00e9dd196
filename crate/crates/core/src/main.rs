fn main() {
    std::process::exit(latticeplan::cli::run(std::env::args_os()));
}
