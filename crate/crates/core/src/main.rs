use std::process::ExitCode;

use clap::Parser;
use fgs_core::cli::{run, Cli};

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let deterministic = std::env::var("FGS_DETERMINISTIC").is_ok_and(|v| v == "1");
    let threads = if deterministic { Some(1) } else { cli.threads };
    if let Some(t) = threads {
        if t == 0 {
            eprintln!("fgs: --threads must be at least 1");
            return ExitCode::from(2);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("fgs: cannot configure thread pool: {e}");
            return ExitCode::from(1);
        }
    }
    ExitCode::from(run(cli))
}
