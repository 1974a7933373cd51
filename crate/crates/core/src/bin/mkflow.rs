fn main() {
    std::process::exit(mkflow::cli::main_with_args(std::env::args_os()));
}
