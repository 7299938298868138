fn main() {
    std::process::exit(tdbcorr::cli::execute(std::env::args_os()));
}
