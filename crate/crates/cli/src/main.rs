use std::net::TcpListener;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use coppertrace_cli::{pipeline, session, CliError, Output, Project, Session, DEFAULT_CURRENT_MA};

/// Route, check and print circuits laid out on 3D-printable meshes.
#[derive(Parser)]
#[command(name = "coppertrace", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Route every net edge and print a summary.
    Route {
        design: PathBuf,
        mesh: PathBuf,
        /// Write the routed design here.
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Carve channels and holes and write the printable mesh.
    Print {
        design: PathBuf,
        mesh: PathBuf,
        #[arg(short, long)]
        out: PathBuf,
        /// Print despite failed traces or clearance violations.
        #[arg(long)]
        force: bool,
    },
    /// Per-trace length, resistance and voltage drop.
    Report {
        design: PathBuf,
        mesh: PathBuf,
        /// Current in mA for the drop column.
        #[arg(long, default_value_t = DEFAULT_CURRENT_MA)]
        current: f64,
    },
    /// Host an editing session over line-delimited JSON on 127.0.0.1.
    Serve {
        design: PathBuf,
        mesh: PathBuf,
        /// 0 picks a free port.
        #[arg(long)]
        port: u16,
    },
    /// Write the bundled example designs and meshes into a directory.
    Demo { dir: PathBuf },
}

fn run(cli: Cli) -> Result<Output, CliError> {
    match cli.command {
        Command::Route { design, mesh, out } => pipeline::route(&mut Project::load(&design, &mesh)?, out.as_deref()),
        Command::Print {
            design,
            mesh,
            out,
            force,
        } => pipeline::print(&mut Project::load(&design, &mesh)?, &out, force).map(|(o, _)| o),
        Command::Report { design, mesh, current } => {
            pipeline::report(&mut Project::load(&design, &mesh)?, current).map(|(o, _)| o)
        }
        Command::Serve { design, mesh, port } => {
            let project = Project::load(&design, &mesh)?;
            let listener = TcpListener::bind(("127.0.0.1", port))
                .map_err(|e| CliError::Input(format!("cannot listen on port {port}: {e}")))?;
            let addr = listener.local_addr().map_err(|e| CliError::Input(e.to_string()))?;
            println!("listening on {addr}");
            let mut s = Session::new(project.mesh, project.doc);
            session::serve(listener, &mut s).map_err(|e| CliError::Input(format!("session: {e}")))?;
            Ok(Output {
                text: String::new(),
                status: coppertrace_cli::Status::Ok,
            })
        }
        Command::Demo { dir } => pipeline::demo(&dir),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(out) => {
            print!("{}", out.text);
            ExitCode::from(out.status.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
