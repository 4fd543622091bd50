fn main() {
    std::process::exit(ss_skeleton_cli::run(std::env::args_os()));
}
