fn main() {
    std::process::exit(killingflow::cli::run(std::env::args_os()));
}
