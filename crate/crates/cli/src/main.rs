fn main() {
    std::process::exit(diskinterp_cli::run(std::env::args_os()));
}
