fn main() {
    std::process::exit(sftransfer::cli::main_with_args(std::env::args_os()));
}
