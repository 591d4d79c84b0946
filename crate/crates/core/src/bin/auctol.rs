fn main() {
    std::process::exit(auctol::cli::run(std::env::args_os()));
}
