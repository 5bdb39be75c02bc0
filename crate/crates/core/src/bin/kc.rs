fn main() {
    std::process::exit(kirchhoff_choquard::cli::run(std::env::args_os()));
}
