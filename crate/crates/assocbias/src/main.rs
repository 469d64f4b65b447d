fn main() -> std::process::ExitCode {
    assocbias::commands::main()
}
