fn main() -> std::process::ExitCode {
    sandwich_core::cli::main()
}
