fn main() {
    std::process::exit(lamb_dipole::cli::dispatch(std::env::args_os()));
}
