fn main() {
    std::process::exit(twise::cli::run(std::env::args_os()));
}
