fn main() {
    std::process::exit(mlsds::cli::run(std::env::args_os()));
}
