fn main() {
    std::process::exit(cofinitary::cli::main());
}
