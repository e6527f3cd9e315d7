fn main() {
    std::process::exit(kronlev::cli::main_with_args(std::env::args_os()));
}
