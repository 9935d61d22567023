fn main() {
    std::process::exit(srpsim::cli::run(std::env::args_os()));
}
