fn main() {
    std::process::exit(radial_mes::cli::dispatch(std::env::args_os()));
}
