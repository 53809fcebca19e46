use std::io;

fn main() {
    let code = flexsky_cli::run_command(std::env::args_os(), &mut io::stdout().lock(), &mut io::stderr().lock());
    std::process::exit(code);
}
