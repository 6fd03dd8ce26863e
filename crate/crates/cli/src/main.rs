fn main() {
    std::process::exit(topicsim_cli::run(std::env::args_os()));
}
