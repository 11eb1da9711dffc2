fn main() {
    std::process::exit(linset_lab::cli::run(std::env::args_os()));
}
