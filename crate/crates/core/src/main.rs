fn main() {
    std::process::exit(tatehh::cli::main());
}
