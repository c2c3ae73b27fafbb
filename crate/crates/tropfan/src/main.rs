fn main() {
    std::process::exit(tropfan::run(std::env::args_os()));
}
