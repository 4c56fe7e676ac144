fn main() {
    std::process::exit(osscalc::cli::main_with(std::env::args_os()));
}
