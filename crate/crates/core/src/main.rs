fn main() {
    std::process::exit(moserlab::cli::run(std::env::args_os()));
}
