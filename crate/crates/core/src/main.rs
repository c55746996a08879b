use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use binder::io::{
    load_lang, parse_document, render_report, render_summary, run_check, run_corpus, CheckOptions,
    Format, InputError, EXIT_INPUT,
};
use binder::transitivity::DEFAULT_ISUM_CAP;

/// Binding constraints checker for annotated discourses.
#[derive(Parser)]
#[command(name = "binder", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check one document.
    Check {
        file: PathBuf,
        #[command(flatten)]
        flags: Flags,
    },
    /// Check every document matching a glob (a directory means its *.json).
    Corpus {
        pattern: String,
        #[command(flatten)]
        flags: Flags,
    },
}

#[derive(Args)]
struct Flags {
    /// Built-in language name or a JSON parameter file; overrides the document.
    #[arg(long)]
    lang: Option<String>,
    /// Include every node's binding lists in the report.
    #[arg(long)]
    dump_lists: bool,
    /// Do not apply the reverse principles.
    #[arg(long)]
    no_reverse: bool,
    /// Do not check the proposed resolution.
    #[arg(long)]
    no_transitivity: bool,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Largest candidate set expanded into i-sums.
    #[arg(long, default_value_t = DEFAULT_ISUM_CAP)]
    max_isum: usize,
}

impl Flags {
    fn options(&self) -> Result<CheckOptions, InputError> {
        Ok(CheckOptions {
            reverse: !self.no_reverse,
            transitivity: !self.no_transitivity,
            dump_lists: self.dump_lists,
            max_isum: self.max_isum,
            lang: self.lang.as_deref().map(load_lang).transpose()?,
        })
    }
}

fn fail(e: &InputError) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(EXIT_INPUT)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Check { file, flags } => {
            let result = flags
                .options()
                .and_then(|opts| parse_document(&file).and_then(|doc| run_check(&doc, &opts)));
            match result {
                Ok(report) => {
                    print!("{}", render_report(&report, flags.format));
                    ExitCode::from(report.exit_code())
                }
                Err(e) => fail(&e),
            }
        }
        Command::Corpus { pattern, flags } => {
            match flags.options().and_then(|opts| run_corpus(&pattern, &opts)) {
                Ok(summary) => {
                    print!("{}", render_summary(&summary, flags.format));
                    ExitCode::from(summary.exit_code())
                }
                Err(e) => fail(&e),
            }
        }
    }
}
