fn main() {
    std::process::exit(arcforge::cli::run(std::env::args_os()));
}
