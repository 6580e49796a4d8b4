fn main() {
    std::process::exit(siegel_renorm::cli::main_with_args(std::env::args_os()));
}
