fn main() {
    std::process::exit(metastab::cli::run());
}
