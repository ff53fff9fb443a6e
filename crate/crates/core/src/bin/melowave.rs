fn main() {
    std::process::exit(melowave::cli::run(std::env::args_os()));
}
