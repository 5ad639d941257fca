fn main() {
    std::process::exit(semibiharm::cli::run(std::env::args_os()));
}
