fn main() {
    std::process::exit(fbdyn::bench::cli::run(std::env::args_os()));
}
