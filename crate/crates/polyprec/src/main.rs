use clap::{Parser, Subcommand};
use num_complex::Complex64;
use polyprec::cli::run_scenario;
use polyprec::error::Error;
use polyprec::operators::{
    make_graph_laplacian, make_laplace, make_synthetic_nonhermitian, random_digraph_adjacency,
    write_matrix_market, LaplaceFamily,
};
use polyprec::poly::{certify_branch, read_poly_file};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "polyprec",
    about = "Polynomially preconditioned Krylov methods for A^{-1/2} b, A^{1/2} b and sign(A) b",
    version
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Execute a scenario file and write convergence CSVs plus a summary.
    Run {
        scenario: PathBuf,
        /// Run up to N grid entries concurrently.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        /// Output directory (overrides the scenario's [output] section).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Generate a model-problem matrix and write it in Matrix Market format.
    GenMatrix {
        /// laplace1d | laplace2d | laplace3d | graph_in_degree_laplacian |
        /// synthetic_nonhermitian
        family: String,
        /// Grid points per direction / number of nodes.
        #[arg(long, default_value_t = 10)]
        n: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Extra random arcs for the digraph generator.
        #[arg(long)]
        extra_edges: Option<usize>,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Load a serialized polynomial and report its branch certificate.
    Certify {
        poly_file: PathBuf,
        /// Sample on a real interval grid: a,b,npoints. Defaults to the
        /// polynomial's own certification sample.
        #[arg(long)]
        grid: Option<String>,
    },
}

fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::Config(_) | Error::ParseError { .. } => 64,
        Error::Io(_) => 74,
        _ => 70,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("polyprec: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}

fn run(cli: Cli) -> Result<u8, Error> {
    match cli.cmd {
        Cmd::Run {
            scenario,
            jobs,
            out,
        } => {
            let code = run_scenario(&scenario, jobs, out.as_deref())?;
            Ok(code as u8)
        }
        Cmd::GenMatrix {
            family,
            n,
            seed,
            extra_edges,
            output,
        } => {
            let m = match family.as_str() {
                "laplace1d" | "laplace2d" | "laplace3d" => {
                    make_laplace(LaplaceFamily::parse(&family).unwrap(), n)
                }
                "graph_in_degree_laplacian" => {
                    let adj = random_digraph_adjacency(n, extra_edges.unwrap_or(3 * n), seed);
                    make_graph_laplacian(&adj)
                }
                "synthetic_nonhermitian" => make_synthetic_nonhermitian(n, seed)?,
                other => {
                    return Err(Error::Config(format!("unknown matrix family: {other}")));
                }
            };
            write_matrix_market(&output, &m)?;
            println!(
                "wrote {} ({} x {}, {} nonzeros)",
                output.display(),
                m.dim(),
                m.dim(),
                m.nnz()
            );
            Ok(0)
        }
        Cmd::Certify { poly_file, grid } => {
            let q = read_poly_file(&poly_file)?;
            let sample = match grid {
                Some(spec) => {
                    let parts: Vec<&str> = spec.split(',').collect();
                    if parts.len() != 3 {
                        return Err(Error::Config("grid must be a,b,npoints".into()));
                    }
                    let a: f64 = parts[0]
                        .parse()
                        .map_err(|_| Error::Config("bad grid start".into()))?;
                    let b: f64 = parts[1]
                        .parse()
                        .map_err(|_| Error::Config("bad grid end".into()))?;
                    let np: usize = parts[2]
                        .parse()
                        .map_err(|_| Error::Config("bad grid count".into()))?;
                    if np < 2 || a >= b || a.is_nan() || b.is_nan() {
                        return Err(Error::Config("grid needs a < b and npoints >= 2".into()));
                    }
                    (0..np)
                        .map(|i| Complex64::new(a + (b - a) * i as f64 / (np - 1) as f64, 0.0))
                        .collect()
                }
                None => q.certification_sample(),
            };
            let cert = certify_branch(q.as_ref(), &sample);
            println!("kind:            {}", q.kind_name());
            println!("degree:          {}", q.degree());
            println!("checked points:  {}", cert.checked_points.len());
            println!("min Re q(z):     {:.6e}", cert.min_real_part);
            println!("satisfied:       {}", cert.satisfied);
            println!("1/sqrt(2) cond.: {}", cert.sqrt2_condition);
            Ok(if cert.satisfied { 0 } else { 2 })
        }
    }
}
