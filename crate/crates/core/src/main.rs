fn main() {
    std::process::exit(flamelens::cli::run(std::env::args_os()));
}
