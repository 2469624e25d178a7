use prime_points_cli::{run, Env};
use std::io::Write;

fn main() {
    let out = run(std::env::args().collect(), &Env::from_process());
    print!("{}", out.stdout);
    eprint!("{}", out.stderr);
    let _ = std::io::stdout().flush();
    std::process::exit(out.code);
}
