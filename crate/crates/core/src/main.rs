fn main() -> std::process::ExitCode {
    hfpquad::cli::main()
}
