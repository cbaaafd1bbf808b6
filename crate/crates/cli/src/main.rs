use std::io::{BufWriter, Write};

fn main() {
    let mut out = BufWriter::new(std::io::stdout());
    let mut code = permtree_cli::run(std::env::args_os(), &mut out, &mut std::io::stderr());
    if out.flush().is_err() && code == 0 {
        code = 1;
    }
    std::process::exit(code);
}
