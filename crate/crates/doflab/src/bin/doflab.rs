fn main() {
    std::process::exit(doflab::cli::run());
}
