fn main() {
    std::process::exit(multisum::cli::main_with_args(std::env::args_os()));
}
