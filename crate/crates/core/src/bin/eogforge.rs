fn main() {
    std::process::exit(eogforge::cli::run(std::env::args_os()));
}
