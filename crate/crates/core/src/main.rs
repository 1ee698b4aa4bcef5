fn main() {
    std::process::exit(heatlayer::cli::run(std::env::args_os()));
}
