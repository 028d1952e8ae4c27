fn main() {
    std::process::exit(fracexpand::cli::run(std::env::args_os()));
}
