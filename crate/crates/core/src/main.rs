fn main() {
    std::process::exit(crex::cli::main_with_args(std::env::args_os()));
}
