use clap::Parser;

fn main() {
    let cli = retime_cli::Cli::parse();
    std::process::exit(i32::from(retime_cli::run(cli)));
}
