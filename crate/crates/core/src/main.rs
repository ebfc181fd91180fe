fn main() {
    std::process::exit(sbm_tcl::cli::run(std::env::args_os()));
}
