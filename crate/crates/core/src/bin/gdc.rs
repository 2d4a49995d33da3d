fn main() {
    std::process::exit(gdc::cli::run(std::env::args_os()));
}
