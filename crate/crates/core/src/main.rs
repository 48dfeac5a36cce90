fn main() {
    std::process::exit(construct_audit::cli::run(std::env::args_os()));
}
