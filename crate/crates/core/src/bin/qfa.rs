fn main() {
    std::process::exit(qfa::cli::run(std::env::args_os()));
}
