fn main() {
    std::process::exit(cbi_cli::main_with_args(std::env::args_os()));
}
