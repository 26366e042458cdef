fn main() {
    std::process::exit(a4count_cli::run(std::env::args_os()));
}
