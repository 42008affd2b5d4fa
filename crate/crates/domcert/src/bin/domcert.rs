fn main() {
    std::process::exit(domcert::cli::run(std::env::args_os()));
}
