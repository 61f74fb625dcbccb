fn main() {
    std::process::exit(wearpolicy_cli::main_with_args(std::env::args_os()));
}
