fn main() {
    std::process::exit(l2boost::cli::run(std::env::args_os()));
}
