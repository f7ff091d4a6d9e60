fn main() {
    std::process::exit(rbe_lab::cli::main_from(std::env::args_os()));
}
