fn main() {
    std::process::exit(qsdwalk::cli::cli_main(std::env::args_os()));
}
