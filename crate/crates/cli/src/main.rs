fn main() {
    std::process::exit(jacobi_cli::main_with_args(std::env::args_os()));
}
