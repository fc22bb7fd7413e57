fn main() {
    std::process::exit(qembed::cli::main_with(std::env::args_os()));
}
