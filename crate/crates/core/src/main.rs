fn main() {
    std::process::exit(quadtors::cli::run(std::env::args_os()));
}
