fn main() {
    std::process::exit(speedup_lab::cli::run_command(std::env::args_os()));
}
