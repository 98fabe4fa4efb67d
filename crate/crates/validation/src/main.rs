//! The `maxscore` command line, built inside this package so the acceptance
//! tests can run it.

fn main() {
    maxscore_cli::main();
}
