fn main() {
    std::process::exit(gdn_cli::run(std::env::args_os()));
}
