fn main() {
    std::process::exit(freemax_cli::run(std::env::args_os()));
}
