fn main() {
    std::process::exit(siegel_cli::main_with_args(std::env::args_os()));
}
