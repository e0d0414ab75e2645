fn main() {
    std::process::exit(ftf::cli::run(std::env::args_os()));
}
