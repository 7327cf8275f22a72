fn main() {
    std::process::exit(expressivity::cli::main());
}
