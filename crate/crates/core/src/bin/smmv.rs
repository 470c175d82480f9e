fn main() {
    std::process::exit(smmv::cli::main_with_args(std::env::args_os()));
}
