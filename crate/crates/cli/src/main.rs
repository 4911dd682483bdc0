use std::io::{self, Write};

use alpaga_cli::{run, Cli, Command, Io};
use clap::Parser;

fn main() {
    let cli = Cli::parse();
    let trace = match &cli.command {
        None => cli.solve.trace,
        Some(Command::Solve(args)) => args.trace,
        _ => false,
    };
    let default_level = if trace { "debug" } else { "warn" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(default_level)).init();

    let code = {
        let mut stdin = io::stdin().lock();
        let mut stdout = io::stdout().lock();
        let mut stderr = io::stderr().lock();
        let code = run(cli, &mut Io { stdin: &mut stdin, stdout: &mut stdout, stderr: &mut stderr });
        let _ = stdout.flush();
        code
    };
    std::process::exit(code);
}
