fn main() -> std::process::ExitCode {
    blaschke::cli::main()
}
