use std::process::ExitCode;

use clap::Parser;
use ontoforge_server::auth::Credentials;
use ontoforge_server::cli::{Cli, CliCommand};
use ontoforge_server::{Server, ServerConfig};

#[tokio::main]
async fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let CliCommand::Serve(args) = Cli::parse().command;
    let credentials = match Credentials::load(&args.credentials) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {}: {e}", args.credentials.display());
            return ExitCode::FAILURE;
        }
    };
    let mut config = ServerConfig::new(args.data_dir, credentials);
    config.bind = args.bind;
    config.port = args.port;
    config.public_url = args.public_url;
    let server = match Server::bind(config).await {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::FAILURE;
        }
    };
    log::info!("listening on http://{}", server.addr);
    let shutdown = async {
        let _ = tokio::signal::ctrl_c().await;
        log::info!("shutting down");
    };
    match server.run(shutdown).await {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
