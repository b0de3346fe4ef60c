fn main() {
    std::process::exit(eventforge_cli::run(std::env::args_os()));
}
