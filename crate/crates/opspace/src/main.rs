fn main() {
    std::process::exit(opspace::cli::run());
}
