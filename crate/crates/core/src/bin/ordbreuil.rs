use clap::Parser;

fn main() {
    let args = ordbreuil::cli::Args::parse();
    let code = ordbreuil::cli::run(args, &mut std::io::stdout(), &mut std::io::stderr());
    std::process::exit(code);
}
