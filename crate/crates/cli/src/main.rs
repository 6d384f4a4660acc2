mod commands;
mod config;
mod output;

use clap::Parser;

use config::{Cli, Command};
use output::Failure;

fn run(cli: Cli) -> Result<(), Failure> {
    let file = config::load(cli.global.config.as_deref())?;
    let common = config::common(&cli.global, &file);
    let explicit_delta = cli.global.ambient_delta.or(file.ambient_delta);
    match &cli.command {
        Command::Generate(a) => commands::generate(&common, a, &file.generate),
        Command::Analyze(a) => commands::analyze_cmd(&common, explicit_delta, a, &file.analyze),
        Command::Rigidity(a) => commands::rigidity(&common, a, &file.rigidity),
        Command::Sweep(a) => commands::sweep(&common, a, &file.sweep),
        Command::Example(a) => commands::example(&common, a),
    }
}

fn main() {
    let cli = Cli::parse();
    if let Err(f) = run(cli) {
        eprintln!("pinchlab: {}", f.message());
        std::process::exit(f.exit_code());
    }
}
