fn main() {
    std::process::exit(bolzalab::cli::cli_run(std::env::args_os()));
}
