use std::net::IpAddr;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

#[derive(Parser, Debug)]
#[command(name = "ontoforge", version, about = "Collaborative OWL ontology editing server")]
pub struct Cli {
    #[command(subcommand)]
    pub command: CliCommand,
}

#[derive(Subcommand, Debug)]
pub enum CliCommand {
    /// Serve the HTTP API.
    Serve(ServeArgs),
}

#[derive(clap::Args, Debug, Clone)]
pub struct ServeArgs {
    #[arg(long, env = "ONTOFORGE_PORT", default_value_t = 8080)]
    pub port: u16,
    /// Directory holding one log file per project.
    #[arg(long, env = "ONTOFORGE_DATA_DIR")]
    pub data_dir: PathBuf,
    /// JSON object mapping bearer tokens to user ids.
    #[arg(long, env = "ONTOFORGE_CREDENTIALS")]
    pub credentials: PathBuf,
    #[arg(long, env = "ONTOFORGE_BIND", default_value = "127.0.0.1")]
    pub bind: IpAddr,
    /// Origin used in notification links, e.g. `https://onto.example.org`.
    #[arg(long, env = "ONTOFORGE_PUBLIC_URL")]
    pub public_url: Option<String>,
}
