fn main() {
    std::process::exit(icepm_app::cli::run(std::env::args_os()));
}
