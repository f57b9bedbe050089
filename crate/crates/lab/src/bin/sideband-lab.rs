fn main() {
    std::process::exit(sideband_lab::cli::run(std::env::args_os()));
}
