fn main() {
    std::process::exit(optospin::cli::run(std::env::args_os()));
}
