use std::process::ExitCode;

use clap::Parser;
use hk_cli::{envelope, run, Cli, RunConfig};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let name = cli.command.name();
    let cfg = match RunConfig::from_cli(&cli) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("error [{}]: {e}", e.code());
            return ExitCode::from(2);
        }
    };
    let outcome = run(&cli.command, &cfg);
    if cli.json {
        let doc = envelope(name, &cfg, &outcome);
        println!("{}", serde_json::to_string_pretty(&doc).expect("serializable"));
    } else {
        match &outcome {
            Ok(report) => report.text.iter().for_each(|line| println!("{line}")),
            Err(e) => eprintln!("error [{}]: {e}", e.code()),
        }
    }
    match outcome {
        Ok(report) if report.ok => ExitCode::SUCCESS,
        Ok(_) => ExitCode::from(1),
        Err(_) => ExitCode::from(2),
    }
}
