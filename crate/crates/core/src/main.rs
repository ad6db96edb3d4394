use std::io;

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let code = mcc::cli::run(
        &args,
        &mut io::stdin().lock(),
        &mut io::stdout().lock(),
        &mut io::stderr().lock(),
    );
    std::process::exit(code);
}
