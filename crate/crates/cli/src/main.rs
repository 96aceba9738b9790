fn main() {
    env_logger::Builder::from_env(env_logger::Env::new().filter("MEANFOL_LOG")).init();
    let code = meanfol_cli::main_with(std::env::args_os(), &mut std::io::stdout().lock(), &mut std::io::stderr());
    std::process::exit(code);
}
