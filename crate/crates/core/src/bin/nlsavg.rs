fn main() {
    std::process::exit(nlsavg::cli::run(std::env::args_os()));
}
