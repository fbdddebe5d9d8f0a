use arithstat_cli::{exit_code, run, Cli, RunConfig};
use clap::Parser;

fn main() {
    let cli = Cli::parse();
    let code = match RunConfig::from_cli(cli) {
        Ok(cfg) => run(&cfg),
        Err(e) => {
            eprintln!(
                "{}",
                serde_json::json!({ "error": e.category(), "message": e.to_string() })
            );
            exit_code(&e)
        }
    };
    std::process::exit(code);
}
