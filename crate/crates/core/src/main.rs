fn main() {
    std::process::exit(aksara::cli::run(std::env::args_os()));
}
