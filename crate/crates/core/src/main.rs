fn main() {
    std::process::exit(fr3sim::cli::run(std::env::args_os()));
}
