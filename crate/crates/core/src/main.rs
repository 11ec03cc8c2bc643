fn main() -> std::process::ExitCode {
    listing_rules::cli::main()
}
