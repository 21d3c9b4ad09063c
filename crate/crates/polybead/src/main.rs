use std::io;

fn main() {
    let mut stdin = io::stdin().lock();
    let code = polybead::cli::main_with(std::env::args_os(), &mut io::stdout(), &mut io::stderr(), &mut stdin);
    std::process::exit(code);
}
