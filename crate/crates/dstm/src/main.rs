fn main() {
    std::process::exit(dstm::cli::run(std::env::args()));
}
