fn main() {
    std::process::exit(unruh_core::cli::dispatch(std::env::args_os()));
}
