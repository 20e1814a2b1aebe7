fn main() {
    std::process::exit(multirace_cli::run(std::env::args_os()));
}
