fn main() {
    std::process::exit(dgfv_cli::run(std::env::args_os()));
}
