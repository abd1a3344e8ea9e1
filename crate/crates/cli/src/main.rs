fn main() {
    std::process::exit(fisherlab_cli::run(std::env::args_os()));
}
