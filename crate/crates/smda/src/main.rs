fn main() {
    std::process::exit(smda::cli::run_cli());
}
