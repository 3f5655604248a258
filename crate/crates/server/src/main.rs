use std::fs;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use postedit_core::analytics::Binning;
use postedit_core::editlog::import_xml;
use postedit_core::suggestions::parse_external_table;
use postedit_core::{Origin, RetrievalConfig};
use postedit_server::report::{build_report, series_csv, Report, ReportKind};
use postedit_server::{api, SegmentRow, Workbench};

#[derive(Parser)]
#[command(name = "postedit", version, about = "Post-editing workbench for computer-aided translation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct DataDir {
    /// Data directory holding the journal and snapshot.
    #[arg(long, env = "POSTEDIT_DATA", default_value = "data")]
    data: PathBuf,
}

#[derive(Args)]
struct Retrieval {
    /// IR candidates fetched per query.
    #[arg(long, env = "POSTEDIT_K", default_value_t = 20)]
    k: usize,
    /// Matches returned per segment after re-ranking.
    #[arg(long, env = "POSTEDIT_N", default_value_t = 5)]
    n: usize,
    /// Minimum similarity for a TM match to be shown.
    #[arg(long, env = "POSTEDIT_THRESHOLD", default_value_t = 0.0)]
    threshold: f64,
    /// Score every entry of small memories instead of only IR candidates.
    #[arg(long, env = "POSTEDIT_BRUTE_FORCE")]
    brute_force: bool,
}

impl Retrieval {
    fn config(&self) -> Result<RetrievalConfig> {
        if !(0.0..=1.0).contains(&self.threshold) {
            bail!("threshold must be within [0, 1]");
        }
        Ok(RetrievalConfig {
            k: self.k,
            n: self.n,
            threshold: self.threshold,
            brute_force: self.brute_force,
        })
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ExternalOrigin {
    Mt,
    Ape,
}

#[derive(Subcommand)]
enum Command {
    /// Run the HTTP service.
    Serve {
        #[command(flatten)]
        data: DataDir,
        #[arg(long, env = "POSTEDIT_LISTEN", default_value = "127.0.0.1:8080")]
        listen: SocketAddr,
        #[command(flatten)]
        retrieval: Retrieval,
    },
    /// Create a project and print its id.
    CreateProject {
        #[command(flatten)]
        data: DataDir,
        #[arg(long)]
        name: String,
        #[arg(long)]
        source_lang: String,
        #[arg(long)]
        target_lang: String,
    },
    /// Add segments from a `segmentId TAB text` file.
    AddSegments {
        #[command(flatten)]
        data: DataDir,
        #[arg(long)]
        project: String,
        #[arg(long)]
        file: PathBuf,
    },
    /// Import a tab-separated translation memory.
    ImportTm {
        #[command(flatten)]
        data: DataDir,
        #[arg(long)]
        project: String,
        #[arg(long)]
        file: PathBuf,
    },
    /// Ingest MT or APE output from a `segmentId TAB translation` file.
    Ingest {
        #[command(flatten)]
        data: DataDir,
        #[arg(long, value_enum)]
        origin: ExternalOrigin,
        #[arg(long)]
        project: String,
        #[arg(long)]
        file: PathBuf,
    },
    /// Compute a report over one or more downloaded XML logs.
    Analyze {
        #[arg(long = "log", required = true)]
        logs: Vec<PathBuf>,
        #[arg(long, value_enum)]
        report: ReportKind,
        #[arg(long)]
        out: PathBuf,
        /// Where the `series` report also writes its CSV; defaults to the
        /// output path with a `.csv` extension.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn open(data: &DataDir) -> Result<Workbench> {
    Workbench::open(&data.data, RetrievalConfig::default())
        .with_context(|| format!("opening data directory {}", data.data.display()))
}

fn print_warnings<W: std::fmt::Display>(warnings: &[W]) {
    for w in warnings {
        eprintln!("warning: {w}");
    }
}

async fn serve(data: DataDir, listen: SocketAddr, retrieval: Retrieval) -> Result<()> {
    let config = retrieval.config()?;
    let workbench = Workbench::open(&data.data, config)
        .with_context(|| format!("opening data directory {}", data.data.display()))?;
    let app = api::router(Arc::new(workbench));
    let listener = tokio::net::TcpListener::bind(listen)
        .await
        .with_context(|| format!("binding {listen}"))?;
    eprintln!("listening on http://{}", listener.local_addr()?);
    axum::serve(listener, app)
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await?;
    Ok(())
}

fn analyze(logs: &[PathBuf], kind: ReportKind, out: &Path, csv: Option<PathBuf>) -> Result<()> {
    let mut records = Vec::new();
    for path in logs {
        let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
        let session = import_xml(&bytes).with_context(|| format!("parsing {}", path.display()))?;
        records.extend(session.records);
    }
    let report = build_report(kind, &records, Binning::PooledTerciles)?;
    fs::write(out, serde_json::to_vec_pretty(&report)?).with_context(|| format!("writing {}", out.display()))?;
    if let Report::Series(series) = &report {
        let csv = csv.unwrap_or_else(|| out.with_extension("csv"));
        fs::write(&csv, series_csv(&series.points)).with_context(|| format!("writing {}", csv.display()))?;
    }
    Ok(())
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Serve { data, listen, retrieval } => {
            tokio::runtime::Runtime::new()?.block_on(serve(data, listen, retrieval))?;
        }
        Command::CreateProject {
            data,
            name,
            source_lang,
            target_lang,
        } => {
            let project = open(&data)?.create_project(&name, &source_lang, &target_lang)?;
            println!("{}", project.project_id);
        }
        Command::AddSegments { data, project, file } => {
            let (rows, warnings) = parse_external_table(&read_text(&file)?);
            print_warnings(&warnings);
            let rows = rows.into_iter().map(|(id, text)| SegmentRow { id, text }).collect();
            let added = open(&data)?.add_segments(&project, rows)?;
            println!("added {added} segments");
        }
        Command::ImportTm { data, project, file } => {
            let report = open(&data)?.upload_tm(&project, &read_text(&file)?)?;
            print_warnings(&report.warnings);
            println!("added {} entries", report.added);
        }
        Command::Ingest {
            data,
            origin,
            project,
            file,
        } => {
            let origin = match origin {
                ExternalOrigin::Mt => Origin::Mt,
                ExternalOrigin::Ape => Origin::Ape,
            };
            let report = open(&data)?.ingest_external(&project, origin, &read_text(&file)?)?;
            print_warnings(&report.warnings);
            println!("stored {} {origin} suggestions", report.stored);
        }
        Command::Analyze { logs, report, out, csv } => analyze(&logs, report, &out, csv)?,
    }
    Ok(())
}
