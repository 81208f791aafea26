fn main() {
    std::process::exit(matvar::cli::run(std::env::args_os()));
}
