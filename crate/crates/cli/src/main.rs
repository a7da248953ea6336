fn main() {
    std::process::exit(kuramoto2c::cli_main());
}
