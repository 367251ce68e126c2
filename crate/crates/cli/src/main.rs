use std::io::Write;

fn main() {
    let mut out = std::io::stdout().lock();
    let code = switchgame_cli::run_command(std::env::args(), &mut out);
    let _ = out.flush();
    std::process::exit(code);
}
