fn main() {
    std::process::exit(bindsem::cli::main());
}
