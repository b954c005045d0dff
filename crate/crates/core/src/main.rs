fn main() {
    std::process::exit(darkbench::cli::run(std::env::args_os()));
}
