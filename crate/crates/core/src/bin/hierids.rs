fn main() {
    std::process::exit(hierids::app::run_cli(std::env::args_os()));
}
