use std::process::exit;

use clap::error::ErrorKind;
use clap::Parser;

use parcf_cli::{exit_code_for, run, Cli};

fn main() {
    // clap's default exit code for usage errors is 2, which this tool
    // reserves for benchmark output mismatches — remap to 1 here.
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = err.print();
            exit(code);
        }
    };
    if let Err(err) = run(cli) {
        eprintln!("error: {err:#}");
        exit(exit_code_for(&err));
    }
}
