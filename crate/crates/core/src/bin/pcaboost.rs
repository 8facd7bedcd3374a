fn main() -> std::process::ExitCode {
    pcaboost::cli::main()
}
