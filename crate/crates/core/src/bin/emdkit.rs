fn main() {
    std::process::exit(emdkit::cli::main());
}
