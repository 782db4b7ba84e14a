use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use geoph::filtration::cech_witness_stream;
use geoph::footprint::{detect, DetectConfig};
use geoph::metric::{circle_metric, flat_torus_metric, graph_geodesic_metric};
use geoph::oracle::{circle_barcode, minimal_basis_barcode};
use geoph::persistence::{compute_persistence, Options};
use geoph::pipeline::{
    experiment_sphere_cap, nullhomology_suite, verify_circle, CircleCheckConfig, ExperimentConfig,
};
use geoph::sampler::{read_points, Mode, SampleSpec, Space};
use geoph::{Barcode, ComplexKind, Convention, FiniteMetric, Persistence};

/// Persistent homology of geodesic spaces: samples, metrics, barcodes,
/// closed-form checks and footprint detection.
///
/// Parallel stages honor RAYON_NUM_THREADS.
#[derive(Parser)]
#[command(name = "geoph", version)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate a point sample.
    Sample {
        #[command(flatten)]
        space: SpaceArgs,
        #[arg(long, default_value = "uniform")]
        mode: Mode,
        #[command(flatten)]
        out: OutArg,
    },
    /// Distance matrix (lower-triangular text) of a sample.
    Metric {
        #[command(flatten)]
        space: SpaceArgs,
        #[arg(long, default_value = "uniform")]
        mode: Mode,
        /// Read points from this file instead of sampling.
        #[arg(long)]
        points: Option<PathBuf>,
        /// Neighbors per point in the geodesic graph (sphere only).
        #[arg(long, default_value_t = 8)]
        k: usize,
        #[command(flatten)]
        out: OutArg,
    },
    /// Persistence diagram of a distance matrix.
    Ph {
        /// Lower-triangular distance file.
        #[arg(long)]
        metric: PathBuf,
        #[arg(long, default_value = "rips")]
        kind: ComplexKind,
        #[arg(long, default_value = "open")]
        convention: Convention,
        #[arg(long, default_value_t = 1)]
        max_dim: usize,
        /// Defaults to the largest distance.
        #[arg(long)]
        threshold: Option<f64>,
        /// Landmark count for the witness complex (evenly strided indices).
        #[arg(long)]
        landmarks: Option<usize>,
        /// Keep zero-length bars.
        #[arg(long)]
        raw: bool,
        #[command(flatten)]
        out: OutArg,
    },
    /// Closed-form barcode of a circle or of a minimal homology basis.
    Oracle {
        #[arg(long, default_value_t = 1.0)]
        length: f64,
        #[arg(long, default_value = "rips")]
        kind: ComplexKind,
        #[arg(long, default_value = "open")]
        convention: Convention,
        #[arg(long, default_value_t = 3)]
        max_dim: usize,
        /// Include closed-convention markers of zero length.
        #[arg(long)]
        ephemeral: bool,
        /// Comma-separated basis loop lengths (ascending); replaces the
        /// circle barcode.
        #[arg(long, value_delimiter = ',')]
        basis: Option<Vec<f64>>,
        #[command(flatten)]
        out: OutArg,
    },
    /// Geodesic-circle candidates read off a persistence diagram.
    Detect {
        /// Diagram file with `dim,birth,death` rows.
        #[arg(long)]
        pd: PathBuf,
        #[arg(long, default_value = "open")]
        convention: Convention,
        #[arg(long, default_value_t = DetectConfig::default().rel_tol)]
        rel_tol: f64,
        #[arg(long, default_value_t = DetectConfig::default().min_persistence)]
        min_persistence: f64,
        #[command(flatten)]
        out: OutArg,
    },
    /// Fan null-homologies of random loops, checked over Z/2.
    NullhomologyVerify {
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        #[arg(long, default_value_t = 200)]
        max_size: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[command(flatten)]
        out: OutArg,
    },
    /// Compare a regular circle sample with the closed form.
    VerifyCircle {
        #[arg(long, default_value_t = 64)]
        n: usize,
        #[arg(long, default_value_t = 1.0)]
        length: f64,
        #[arg(long, default_value = "rips")]
        kind: ComplexKind,
        #[arg(long, default_value = "open")]
        convention: Convention,
        #[arg(long, default_value_t = 3)]
        max_dim: usize,
        #[arg(long, default_value_t = 0.02)]
        tol: f64,
        /// Witness count for the witness complex.
        #[arg(long, default_value_t = 480)]
        witnesses: usize,
        #[command(flatten)]
        out: OutArg,
    },
    /// The sphere-with-a-hole experiment: two persistence passes,
    /// detection and localization.
    ExperimentSphereCap {
        #[arg(long, default_value_t = 4000)]
        n_total: usize,
        #[arg(long, default_value_t = 400)]
        n_sub: usize,
        #[arg(long, default_value_t = 300)]
        n_sub_long: usize,
        #[arg(long, default_value_t = 1.0)]
        radius: f64,
        #[arg(long, default_value_t = 0.25)]
        rho: f64,
        #[arg(long, default_value_t = 60)]
        boundary_m: usize,
        #[arg(long, default_value_t = 8)]
        k: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Directory for diagrams and report; the report also goes to stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum SpaceKind {
    Circle,
    FlatTorus,
    SphereMinusCap,
}

#[derive(Args)]
struct SpaceArgs {
    #[arg(long, value_enum, default_value = "circle")]
    space: SpaceKind,
    #[arg(long, default_value_t = 100)]
    n: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Circle circumference.
    #[arg(long, default_value_t = 1.0)]
    length: f64,
    /// Flat torus side lengths.
    #[arg(long, default_value_t = 1.0)]
    a: f64,
    #[arg(long, default_value_t = 1.3)]
    b: f64,
    /// Sphere radius and Euclidean radius of the removed cap.
    #[arg(long, default_value_t = 1.0)]
    radius: f64,
    #[arg(long, default_value_t = 0.25)]
    rho: f64,
    /// Extra points spaced evenly on the cap boundary.
    #[arg(long, default_value_t = 0)]
    boundary_m: usize,
}

impl SpaceArgs {
    fn space(&self) -> Space {
        match self.space {
            SpaceKind::Circle => Space::Circle {
                circumference: self.length,
            },
            SpaceKind::FlatTorus => Space::FlatTorus {
                a: self.a,
                b: self.b,
            },
            SpaceKind::SphereMinusCap => Space::SphereMinusCap {
                radius: self.radius,
                cap_radius: self.rho,
                boundary_m: self.boundary_m,
            },
        }
    }

    fn spec(&self, mode: Mode) -> SampleSpec {
        SampleSpec {
            space: self.space(),
            n: self.n,
            mode,
            seed: self.seed,
        }
    }
}

#[derive(Args)]
struct OutArg {
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl OutArg {
    fn writer(&self) -> Result<Box<dyn Write>> {
        Ok(match &self.out {
            Some(p) => Box::new(BufWriter::new(
                File::create(p).with_context(|| format!("creating {}", p.display()))?,
            )),
            None => Box::new(BufWriter::new(io::stdout().lock())),
        })
    }
}

fn open(path: &Path) -> Result<BufReader<File>> {
    Ok(BufReader::new(
        File::open(path).with_context(|| format!("opening {}", path.display()))?,
    ))
}

fn metric_of(space: &SpaceArgs, points: &[Vec<f64>], k: usize) -> Result<FiniteMetric> {
    let dim = points.first().map_or(0, Vec::len);
    let need = |d: usize| {
        if dim != d {
            bail!("expected {d} coordinates per point, found {dim}");
        }
        Ok(())
    };
    Ok(match space.space() {
        Space::Circle { circumference } => {
            need(1)?;
            circle_metric(
                &points.iter().map(|p| p[0]).collect::<Vec<_>>(),
                circumference,
            )?
        }
        Space::FlatTorus { a, b } => {
            need(2)?;
            flat_torus_metric(
                &points.iter().map(|p| [p[0], p[1]]).collect::<Vec<_>>(),
                a,
                b,
            )?
        }
        Space::SphereMinusCap { .. } => {
            need(3)?;
            graph_geodesic_metric(points, k)?
        }
    })
}

/// Runs one subcommand; `Ok(false)` means a requested check failed.
fn run(cmd: Cmd) -> Result<bool> {
    match cmd {
        Cmd::Sample { space, mode, out } => {
            let sample = space.spec(mode).generate()?;
            let mut w = out.writer()?;
            sample.write_text(&mut w)?;
            w.flush()?;
        }
        Cmd::Metric {
            space,
            mode,
            points,
            k,
            out,
        } => {
            let pts = match &points {
                Some(p) => read_points(open(p)?)?,
                None => space.spec(mode).generate()?.points,
            };
            let metric = metric_of(&space, &pts, k)?;
            let mut w = out.writer()?;
            metric.write_lower_triangular(&mut w)?;
            w.flush()?;
        }
        Cmd::Ph {
            metric,
            kind,
            convention,
            max_dim,
            threshold,
            landmarks,
            raw,
            out,
        } => {
            let metric = FiniteMetric::read_lower_triangular(open(&metric)?)?;
            let threshold = threshold.unwrap_or_else(|| metric.max_distance());
            let barcode = match kind {
                ComplexKind::Rips => {
                    Persistence::rips(
                        &metric,
                        max_dim,
                        threshold,
                        convention,
                        Options {
                            raw,
                            keep_pairs: false,
                        },
                    )?
                    .barcode
                }
                ComplexKind::CechWitness => {
                    let n = metric.len();
                    let m = landmarks.unwrap_or(n).clamp(1, n);
                    let lm: Vec<usize> = (0..m).map(|i| i * n / m).collect();
                    let stream = cech_witness_stream(
                        &metric,
                        &lm,
                        None,
                        max_dim as i64 + 1,
                        threshold,
                        convention,
                    )?;
                    compute_persistence(&stream)?
                }
            };
            let mut w = out.writer()?;
            barcode.write_pd(&mut w, raw)?;
            w.flush()?;
        }
        Cmd::Oracle {
            length,
            kind,
            convention,
            max_dim,
            ephemeral,
            basis,
            out,
        } => {
            let oracle = match basis {
                Some(lengths) => minimal_basis_barcode(&lengths)?,
                None => circle_barcode(length, max_dim, kind, convention, ephemeral)?,
            };
            let mut w = out.writer()?;
            oracle.write_pd(&mut w, ephemeral)?;
            w.flush()?;
        }
        Cmd::Detect {
            pd,
            convention,
            rel_tol,
            min_persistence,
            out,
        } => {
            let barcode = Barcode::read_pd(open(&pd)?, convention)?;
            let cfg = DetectConfig {
                rel_tol,
                min_persistence,
                ..DetectConfig::default()
            };
            cfg.validate()?;
            let mut w = out.writer()?;
            writeln!(w, "{}", detect(&barcode, &cfg).to_json())?;
            w.flush()?;
        }
        Cmd::NullhomologyVerify {
            trials,
            max_size,
            seed,
            out,
        } => {
            let suite = nullhomology_suite(trials, max_size, seed)?;
            let mut w = out.writer()?;
            writeln!(w, "{}", serde_json::to_string_pretty(&suite)?)?;
            w.flush()?;
            return Ok(suite.pass());
        }
        Cmd::VerifyCircle {
            n,
            length,
            kind,
            convention,
            max_dim,
            tol,
            witnesses,
            out,
        } => {
            let cfg = CircleCheckConfig {
                n,
                length,
                kind,
                convention,
                max_dim,
                tol,
                witnesses,
                ..Default::default()
            };
            let check = verify_circle(&cfg)?;
            let mut w = out.writer()?;
            for r in &check.rows {
                let found = r
                    .found
                    .map_or("none".to_string(), |(b, d)| format!("({b}, {d}]"));
                writeln!(
                    w,
                    "dim {} expected ({}, {}] found {found} residual {} {}",
                    r.dim,
                    r.expected.0,
                    r.expected.1,
                    r.residual,
                    if r.ok { "ok" } else { "MISMATCH" }
                )?;
            }
            for (dim, b, d) in &check.extra {
                writeln!(w, "dim {dim} unexpected ({b}, {d}]")?;
            }
            writeln!(w, "{}", if check.pass { "PASS" } else { "FAIL" })?;
            w.flush()?;
            return Ok(check.pass);
        }
        Cmd::ExperimentSphereCap {
            n_total,
            n_sub,
            n_sub_long,
            radius,
            rho,
            boundary_m,
            k,
            seed,
            out,
        } => {
            let cfg = ExperimentConfig {
                n_total,
                n_sub,
                n_sub_long,
                radius,
                cap_radius: rho,
                boundary_m,
                k,
                seed,
                ..ExperimentConfig::default()
            };
            let report = experiment_sphere_cap(&cfg)?;
            if let Some(dir) = &out {
                report.write_to(dir)?;
            }
            println!("{}", serde_json::to_string_pretty(&report)?);
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    match run(Cli::parse().cmd) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
