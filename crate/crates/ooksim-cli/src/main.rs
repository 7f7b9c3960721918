fn main() {
    std::process::exit(ooksim_cli::run(std::env::args_os()));
}
