fn main() {
    std::process::exit(structbc::cli::main_entry());
}
