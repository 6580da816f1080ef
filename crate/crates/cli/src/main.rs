fn main() {
    std::process::exit(ctqt_cli::app::main_with(std::env::args_os()));
}
