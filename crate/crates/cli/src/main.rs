fn main() {
    let mut stdout = std::io::stdout().lock();
    match slcpop_cli::run(std::env::args_os(), &mut stdout) {
        Ok(code) => std::process::exit(code),
        Err(e) => {
            if let Some(ce) = e.downcast_ref::<clap::Error>() {
                ce.exit();
            }
            eprintln!("error: {e}");
            std::process::exit(1);
        }
    }
}
