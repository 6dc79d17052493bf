fn main() {
    std::process::exit(zetalab_cli::run(std::env::args_os()));
}
