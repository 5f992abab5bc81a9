fn main() {
    std::process::exit(flatlab::cli::main());
}
