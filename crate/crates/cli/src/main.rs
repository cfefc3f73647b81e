use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use tcenter_core::config::Config;
use tcenter_core::exchange::Document;
use tcenter_core::persist::Db;
use tcenter_core::{Error, SYSTEM_MEMBER};
use tracing_subscriber::EnvFilter;

const STATS_HELP: &str = "\
Output grammar, one record per line:

  items <N>
  <lang> <translated>/<total> <percent>%

The first line counts catalog items. Then one line per registered language
(or only --lang), in code order. <percent> has exactly one decimal, rounded
half up, and is 0.0 for an empty catalog. Example:

  items 4
  es 3/4 75.0%
  fr 0/4 0.0%";

/// Administration tool for the translation center.
///
/// Exit status: 0 on success, 1 for invalid input, unknown ids and usage
/// errors, 2 for I/O failures, including a data directory held by a running
/// server.
#[derive(Debug, Parser)]
#[command(name = "tcenter", version)]
struct Cli {
    /// Configuration file.
    #[arg(long, global = true, default_value = "tcenter.toml")]
    config: PathBuf,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the HTTP server until interrupted.
    Serve,
    /// Import a catalog or translation document; the kind is detected.
    Import {
        #[arg(long)]
        file: PathBuf,
    },
    /// Write the translation document for one language.
    Export {
        #[arg(long)]
        lang: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print translation progress.
    #[command(after_long_help = STATS_HELP)]
    Stats {
        #[arg(long)]
        lang: Option<String>,
    },
}

/// Failure carrying the exit status it maps to.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure {
            code: if e.is_io() { 2 } else { 1 },
            message: e.to_string(),
        }
    }
}

impl From<tcenter_service::ServeError> for Failure {
    fn from(e: tcenter_service::ServeError) -> Self {
        Failure {
            code: if e.is_io() { 2 } else { 1 },
            message: e.to_string(),
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    tracing_subscriber::fmt()
        .with_env_filter(EnvFilter::try_from_default_env().unwrap_or_else(|_| EnvFilter::new("info")))
        .with_writer(std::io::stderr)
        .init();

    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("tcenter: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    let config = Config::load(&cli.config)?;
    match cli.command {
        Command::Serve => serve(config),
        Command::Import { file } => import(&config, &file),
        Command::Export { lang, out } => export(&config, &lang, &out),
        Command::Stats { lang } => stats(&config, lang.as_deref()),
    }
}

fn open(config: &Config) -> Result<Db, Failure> {
    Ok(Db::open(&config.data_dir, config.settings())?)
}

fn serve(config: Config) -> Result<(), Failure> {
    let runtime = tokio::runtime::Runtime::new().map_err(|e| Failure {
        code: 2,
        message: format!("cannot start runtime: {e}"),
    })?;
    Ok(runtime.block_on(tcenter_service::serve(config))?)
}

fn import(config: &Config, file: &Path) -> Result<(), Failure> {
    let text = fs::read_to_string(file).map_err(|e| Error::io(file, e))?;
    let doc = Document::parse(&text)?;
    let db = open(config)?;
    match doc {
        Document::Catalog(doc) => {
            let summary = db.write(|c| c.import_catalog(&doc))?;
            println!("{summary}");
        }
        Document::Translations(doc) => {
            let s = db.write(|c| c.import_translations(&doc, SYSTEM_MEMBER))?;
            println!("{} applied, {} unchanged, {} skipped", s.applied, s.unchanged, s.skipped);
        }
    }
    Ok(())
}

fn export(config: &Config, lang: &str, out: &Path) -> Result<(), Failure> {
    let db = open(config)?;
    let doc = db.read(|c| c.export_translations(lang))?;
    fs::write(out, doc.to_json()).map_err(|e| Error::io(out, e))?;
    println!("exported {} items to {}", doc.items.len(), out.display());
    Ok(())
}

fn stats(config: &Config, lang: Option<&str>) -> Result<(), Failure> {
    let db = open(config)?;
    let lines = db.read(|c| {
        let langs: Vec<String> = match lang {
            Some(l) => {
                c.require_lang(l)?;
                vec![l.to_owned()]
            }
            None => c.languages().map(|l| l.code.to_string()).collect(),
        };
        let mut lines = vec![format!("items {}", c.items().count())];
        for l in langs {
            let p = c.progress(&l);
            lines.push(format!("{} {}/{} {}%", l, p.translated_count, p.total_count, p.percent));
        }
        Ok::<_, Error>(lines)
    })?;
    for line in lines {
        println!("{line}");
    }
    Ok(())
}
