fn main() {
    std::process::exit(catsampler::experiments::cli::run_cli(std::env::args_os()));
}
