use clap::Parser;
use sbf_cli::args::Cli;

fn main() {
    sbf::io::init_threads();
    let cli = Cli::parse();
    let code = match sbf_cli::run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("sbf: {e}");
            e.code
        }
    };
    std::process::exit(code);
}
