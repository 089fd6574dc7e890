fn main() {
    std::process::exit(betaproc::cli::main_from_env());
}
