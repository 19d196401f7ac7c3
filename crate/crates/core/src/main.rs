fn main() -> std::process::ExitCode {
    putargets::cli::main()
}
