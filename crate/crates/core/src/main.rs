fn main() {
    std::process::exit(bandcap::cli::dispatch(std::env::args_os()));
}
