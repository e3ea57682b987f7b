fn main() {
    std::process::exit(horoshadow::cli::run(std::env::args_os()));
}
