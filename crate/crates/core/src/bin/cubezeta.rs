fn main() {
    std::process::exit(cubezeta::cli::main_entry());
}
