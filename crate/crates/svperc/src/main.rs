fn main() {
    std::process::exit(svperc::cli::run(std::env::args_os()));
}
