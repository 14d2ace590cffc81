fn main() {
    std::process::exit(posetpack::cli::run(std::env::args_os()));
}
