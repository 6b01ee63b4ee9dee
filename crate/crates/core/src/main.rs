fn main() {
    let args: Vec<String> = std::env::args().collect();
    std::process::exit(chroma::cli::run_cli(&args));
}
