fn main() {
    std::process::exit(wxspectral::cli::run(std::env::args_os()));
}
