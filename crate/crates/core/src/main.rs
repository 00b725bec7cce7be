fn main() -> std::process::ExitCode {
    quotus::cli::main()
}
