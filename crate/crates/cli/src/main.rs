use std::io;

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let ctx = vulture_cli::Context::system();
    let code = vulture_cli::run(std::env::args_os(), &ctx, &mut io::stdout(), &mut io::stderr());
    std::process::exit(code);
}
