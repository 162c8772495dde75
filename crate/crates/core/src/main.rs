fn main() -> std::process::ExitCode {
    esabc::cli::main_entry()
}
