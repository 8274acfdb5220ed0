//! Command-line front end for the `tdcp` solver.

pub mod args;
pub mod commands;
pub mod report;

use args::{Cli, Command};

pub fn run(cli: &Cli) -> anyhow::Result<()> {
    match &cli.command {
        Command::Train(a) => commands::train(a).map(|_| ()),
        Command::Eval(a) => commands::eval(a).map(|_| ()),
        Command::Oracle(a) => commands::oracle(a),
        Command::Build(a) => commands::build(a),
        Command::GenNetwork(a) => commands::gen_network_cmd(a),
    }
}
