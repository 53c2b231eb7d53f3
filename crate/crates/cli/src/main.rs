fn main() {
    std::process::exit(ris_noma::cli::main());
}
