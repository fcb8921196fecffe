use std::io;

fn main() {
    let code = adaptive_sprt::cli::cli_main(std::env::args_os(), &mut io::stdout().lock());
    std::process::exit(code);
}
