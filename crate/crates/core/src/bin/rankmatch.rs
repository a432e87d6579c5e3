fn main() {
    std::process::exit(rankmatch::cli::main_with_args());
}
