fn main() {
    let status = faq_cli::execute_command(std::env::args_os(), &mut std::io::stdout(), &mut std::io::stderr());
    std::process::exit(status);
}
