fn main() {
    std::process::exit(shearcount::cli::dispatch(std::env::args_os()));
}
