fn main() {
    std::process::exit(costcode_cli::run(std::env::args_os()));
}
