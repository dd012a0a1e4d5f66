fn main() {
    std::process::exit(workbench::harness::cli::main_with(std::env::args_os()));
}
