fn main() {
    std::process::exit(quadcert::cli::main_entry());
}
