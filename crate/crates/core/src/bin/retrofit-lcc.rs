fn main() {
    std::process::exit(retrofit_core::cli::run(std::env::args_os()));
}
