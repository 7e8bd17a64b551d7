fn main() {
    std::process::exit(pathgen::cli::run(std::env::args_os()));
}
