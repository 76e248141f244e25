use std::path::PathBuf;
use std::process::ExitCode;

use a4f_mine::{challenges_of, compute_stats, parse_tree, report, Format};
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "a4f-mine", version, about = "Session statistics over derivation trees")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Classify sessions by how many challenges they solved.
    Stats {
        /// Tree document on disk. Repeat for several links.
        #[arg(long, required_unless_present = "url")]
        tree: Vec<PathBuf>,
        /// Tree download URL, `<service>/api/models/<token>/tree`.
        #[arg(long)]
        url: Vec<String>,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
        /// Restrict to these challenges (comma separated).
        #[arg(long, value_delimiter = ',')]
        challenges: Vec<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

enum Failure {
    Input(String),
    Other(String),
}

fn fetch(url: &str) -> Result<String, Failure> {
    let mut resp = ureq::get(url).call().map_err(|e| Failure::Other(format!("{url}: {e}")))?;
    resp.body_mut()
        .read_to_string()
        .map_err(|e| Failure::Other(format!("{url}: {e}")))
}

fn url_label(url: &str) -> String {
    url.trim_end_matches('/')
        .trim_end_matches("/tree")
        .rsplit('/')
        .next()
        .unwrap_or(url)
        .to_string()
}

fn run(cli: Cli) -> Result<(), Failure> {
    let Command::Stats {
        tree,
        url,
        format,
        challenges,
        out,
    } = cli.command;
    let mut inputs = Vec::new();
    for path in &tree {
        let text = std::fs::read_to_string(path).map_err(|e| Failure::Other(format!("{}: {e}", path.display())))?;
        let label = path.file_stem().map_or_else(|| path.display().to_string(), |s| s.to_string_lossy().into_owned());
        inputs.push((label, text));
    }
    for u in &url {
        inputs.push((url_label(u), fetch(u)?));
    }
    let mut stats = Vec::new();
    for (label, text) in inputs {
        let t = parse_tree(&text).map_err(|e| Failure::Input(format!("{label}: {e}")))?;
        let names = if challenges.is_empty() { challenges_of(&t) } else { challenges.clone() };
        stats.push(compute_stats(&t, &label, &names).map_err(|e| Failure::Input(format!("{label}: {e}")))?);
    }
    let doc = report(&stats, format);
    match out {
        Some(p) => std::fs::write(&p, doc).map_err(|e| Failure::Other(format!("{}: {e}", p.display()))),
        None => {
            print!("{doc}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Input(m)) => {
            eprintln!("a4f-mine: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Other(m)) => {
            eprintln!("a4f-mine: {m}");
            ExitCode::FAILURE
        }
    }
}
