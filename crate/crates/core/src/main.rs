fn main() {
    std::process::exit(monogenic::cli::run(std::env::args_os()));
}
