fn main() {
    maxscore_cli::main();
}
