fn main() {
    std::process::exit(weyl_alf::cli::run(std::env::args_os()));
}
