use std::io::{self, Write};

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let stdout = io::stdout();
    let mut stdout = io::BufWriter::new(stdout.lock());
    let code = seedlex_cli::run(std::env::args_os(), &mut stdout, &mut io::stderr());
    let _ = stdout.flush();
    std::process::exit(code);
}
