fn main() {
    std::process::exit(dicke_ed::cli::cli_main(std::env::args_os()));
}
