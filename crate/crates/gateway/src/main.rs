fn main() -> std::process::ExitCode {
    murmur_gateway::cli::main()
}
