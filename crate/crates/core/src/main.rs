fn main() {
    std::process::exit(uavnoma::cli::main());
}
