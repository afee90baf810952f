fn main() {
    if let Err(e) = csie_cli::run(std::env::args_os().collect()) {
        eprintln!("csie: {e}");
        std::process::exit(e.exit_code());
    }
}
