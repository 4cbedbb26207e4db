fn main() {
    std::process::exit(lobtail::main_with_args(std::env::args_os()));
}
