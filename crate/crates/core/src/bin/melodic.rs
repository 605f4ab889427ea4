fn main() {
    std::process::exit(melodic::cli::main());
}
