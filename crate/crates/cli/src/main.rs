fn main() {
    let code = ris_sizer_cli::main_with_args(std::env::args_os(), &mut std::io::stdout().lock(), &mut std::io::stderr());
    std::process::exit(code);
}
