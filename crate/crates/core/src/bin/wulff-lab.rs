fn main() {
    std::process::exit(wulff_lab::cli::run_cli(std::env::args_os()));
}
