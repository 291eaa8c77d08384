fn main() -> std::process::ExitCode {
    metaqa::cli::main()
}
