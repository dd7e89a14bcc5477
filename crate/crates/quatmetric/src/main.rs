fn main() -> std::process::ExitCode {
    quatmetric::cli::main_with_args(std::env::args_os())
}
