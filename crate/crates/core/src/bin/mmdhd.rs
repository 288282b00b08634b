fn main() {
    std::process::exit(mmdhd::cli::dispatch(std::env::args_os()));
}
