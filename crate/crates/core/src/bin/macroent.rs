fn main() {
    let verbose = std::env::args().any(|a| a == "-v" || a == "--verbose");
    let level = if verbose { "info" } else { "warn" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    std::process::exit(macroent::cli::main_with_args(std::env::args_os()));
}
