use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use sphereprobe::bundle::{monodromy, s2prime_path, triangle_record, BundleAtlas};
use sphereprobe::census::SphereCensus;
use sphereprobe::io::{cache_path, export_graph, load_or_build, read_census, GraphFormat, RunConfig, CACHE_DIR_VAR};
use sphereprobe::lowpaths::{connect_above, push_up_record};
use sphereprobe::medium::{medium_sphere_path, restricted_view};
use sphereprobe::suite::{run_suite, Suite};
use sphereprobe::{Curve, Error, Preset};

/// Exit status for audit failures: a contradiction, hence a bug.
const EXIT_AUDIT: u8 = 1;
/// Exit status for bad input, missing caches and I/O problems.
const EXIT_USAGE: u8 = 2;
/// Exit status of single constructions that ran out of their caps.
const EXIT_CAP: u8 = 3;

#[derive(Parser)]
#[command(name = "sphereprobe", version, about = "Curve-graph censuses and verification suites on punctured spheres")]
struct Cli {
    #[command(flatten)]
    opts: Opts,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Opts {
    #[arg(long, global = true, value_enum, default_value_t = SurfaceArg::S05Fig1)]
    surface: SurfaceArg,
    /// Weight cap of the census.
    #[arg(long, global = true, default_value_t = 24)]
    cap: u32,
    /// Punctures surrounded by the center, as `p-q`.
    #[arg(long, global = true, default_value = "1-2")]
    center: String,
    /// Weight bound of the distance witness search.
    #[arg(long, global = true)]
    witness_bound: Option<u32>,
    /// Annular projection threshold for the bounded geodesic image check
    #[arg(long, global = true)]
    bgi_m: Option<u32>,
    /// Extra projection distance demanded beyond the threshold
    #[arg(long, global = true)]
    slack: Option<u32>,
    #[arg(long, global = true, default_value_t = 64)]
    max_twist_power: i64,
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,
    #[arg(long, global = true, default_value_t = 20)]
    samples: usize,
    /// Half-width of fiber chart windows.
    #[arg(long, global = true)]
    window: Option<u32>,
    /// Census cap of complement searches.
    #[arg(long, global = true)]
    complement_cap: Option<u32>,
    /// Layer index for layered suites.
    #[arg(long, global = true)]
    r: Option<u32>,
    /// Output file; standard output when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<FormatArg>,
    /// Census file to use instead of the cache.
    #[arg(long, global = true)]
    census: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum SurfaceArg {
    #[value(name = "s05-fig1")]
    S05Fig1,
    #[value(name = "s05-sorted")]
    S05Sorted,
    #[value(name = "s06")]
    S06,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FormatArg {
    Json,
    Dot,
    Graphml,
}

#[derive(Clone, Copy, ValueEnum)]
enum SuiteArg {
    Girth,
    Pentagon,
    Lowpath,
    Medium,
    Bundle,
    Projection,
}

#[derive(Subcommand)]
enum Command {
    /// Build the census for the configuration and store it in the cache.
    Census,
    /// Run a verification suite on the cached census.
    Verify {
        #[arg(value_enum)]
        suite: SuiteArg,
        /// Restrict the suite to one of its checks.
        #[arg(long)]
        check: Option<String>,
    },
    /// Write the census graph as DOT or GraphML.
    Export {
        /// Layers to keep, as `lo-hi`.
        #[arg(long, default_value = "0-2")]
        layers: String,
        /// Annotate second-layer vertices with fiber and index.
        #[arg(long)]
        fibers: bool,
    },
    /// Connect two curves one layer beyond a pivot.
    Lowpath {
        #[arg(long)]
        pivot: String,
        #[arg(long)]
        from: String,
        #[arg(long)]
        to: String,
        /// Report the push-up audit of the preliminary path instead.
        #[arg(long)]
        push_up: bool,
    },
    /// Path between two curves of a layer that avoids the layer below.
    Medium {
        #[arg(long)]
        from: String,
        #[arg(long)]
        to: String,
    },
    /// Fiber charts, pairings, monodromy and paths in the second layer.
    Bundle {
        #[command(subcommand)]
        op: BundleOp,
    },
}

#[derive(Subcommand)]
enum BundleOp {
    /// Chart of the fiber over a first-layer curve.
    Chart {
        #[arg(long)]
        base: String,
    },
    /// Pairing between the fibers over two first-layer curves meeting twice.
    Pairing {
        #[arg(long)]
        first: String,
        #[arg(long)]
        second: String,
    },
    /// Monodromy of a closed path of first-layer curves; the fundamental
    /// triangle when no path is given.
    Monodromy {
        /// Path vertices, in order; repeat the first at the end to close.
        #[arg(long = "via")]
        via: Vec<String>,
    },
    /// Path between two non-isolated second-layer curves.
    S2path {
        #[arg(long)]
        from: String,
        #[arg(long)]
        to: String,
    },
}

enum Failure {
    Audit(String),
    Cap(String),
    Usage(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Audit(_) => Failure::Audit(e.to_string()),
            e if e.is_cap_exhaustion() => Failure::Cap(e.to_string()),
            e => Failure::Usage(e.to_string()),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

type Outcome<T> = std::result::Result<T, Failure>;

fn run_config(o: &Opts) -> Outcome<RunConfig> {
    let d = RunConfig::default();
    let (p, q) = parse_pair(&o.center).ok_or_else(|| Failure::Usage(format!("bad center {}", o.center)))?;
    let cfg = RunConfig {
        surface: match o.surface {
            SurfaceArg::S05Fig1 => Preset::S05Fig1,
            SurfaceArg::S05Sorted => Preset::S05Sorted,
            SurfaceArg::S06 => Preset::S06Sorted,
        },
        center: [p, q],
        cap: o.cap,
        witness_bound: o.witness_bound.unwrap_or(d.witness_bound),
        max_curves: d.max_curves,
        bgi_m: o.bgi_m,
        slack: o.slack,
        max_twist_power: o.max_twist_power,
        samples: o.samples,
        seed: o.seed,
        window: o.window.unwrap_or(d.window),
        complement_cap: o.complement_cap.unwrap_or(d.complement_cap),
        r: o.r,
    };
    cfg.validate()?;
    Ok(cfg)
}

fn parse_pair(s: &str) -> Option<(u8, u8)> {
    let (a, b) = s.split_once('-')?;
    Some((a.trim().parse().ok()?, b.trim().parse().ok()?))
}

/// A curve given as `p-q` (the standard curve around two punctures) or as
/// comma-separated normal coordinates.
fn parse_curve(census: &SphereCensus, s: &str) -> Outcome<Curve> {
    let surface = census.surface();
    if let Some((p, q)) = parse_pair(s) {
        return Ok(Curve::standard(surface, p, q)?);
    }
    let coords: Vec<u32> = s
        .split(',')
        .map(|x| x.trim().parse::<u32>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| Failure::Usage(format!("cannot read curve {s}")))?;
    Ok(Curve::from_coords(surface, &coords)?)
}

fn load_census(o: &Opts, cfg: &RunConfig) -> Outcome<SphereCensus> {
    let path = match &o.census {
        Some(p) => p.clone(),
        None => cache_path(cfg)?,
    };
    let f = File::open(&path).map_err(|_| {
        Failure::Usage(format!(
            "no census at {}; run `sphereprobe census` with the same options first or set {CACHE_DIR_VAR}",
            path.display()
        ))
    })?;
    Ok(read_census(&mut BufReader::new(f), Some(cfg))?.1)
}

fn output(o: &Opts) -> Outcome<Box<dyn Write>> {
    Ok(match &o.out {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn emit(o: &Opts, value: &impl Serialize) -> Outcome<()> {
    if matches!(o.format, Some(f) if f != FormatArg::Json) {
        return Err(Failure::Usage("this command writes JSON only".into()));
    }
    let mut w = output(o)?;
    serde_json::to_writer(&mut w, value).map_err(|e| Failure::Usage(e.to_string()))?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

fn run(cli: Cli) -> Outcome<()> {
    let o = &cli.opts;
    let cfg = run_config(o)?;
    match cli.command {
        Command::Census => {
            let census = load_or_build(&cfg)?;
            let path = cache_path(&cfg)?;
            if let Some(out) = &o.out {
                std::fs::copy(&path, out)?;
            }
            let layers: Vec<usize> = census.radii().iter().map(|&r| census.layer(r).len()).collect();
            if layers.get(1).is_none_or(|&n| n == 0) {
                eprintln!("warning: the first layer is empty at cap {}", cfg.cap);
            }
            let summary = serde_json::json!({
                "cache": path,
                "curves": census.len(),
                "layers": layers,
                "exact_through": (0..=4).take_while(|&r| census.exact_through(r)).last(),
            });
            println!("{summary}");
            Ok(())
        }
        Command::Verify { suite, check } => {
            let census = load_census(o, &cfg)?;
            let suite = match suite {
                SuiteArg::Girth => Suite::Girth,
                SuiteArg::Pentagon => Suite::Pentagon,
                SuiteArg::Lowpath => Suite::Lowpath,
                SuiteArg::Medium => Suite::Medium,
                SuiteArg::Bundle => Suite::Bundle,
                SuiteArg::Projection => Suite::Projection,
            };
            if matches!(o.format, Some(f) if f != FormatArg::Json) {
                return Err(Failure::Usage("reports are written as JSON lines".into()));
            }
            let report = run_suite(suite, &census, &cfg, check.as_deref())?;
            report.write_jsonl(&mut output(o)?)?;
            let s = report.summary();
            eprintln!("{suite}: {} checks, {} passed, {} exhausted, {} failed", s.total, s.passed, s.exhausted, s.failed);
            if s.exhausted > 0 {
                eprintln!("warning: {} checks ran out of their caps", s.exhausted);
            }
            if s.failed > 0 {
                return Err(Failure::Audit(format!("{} checks failed", s.failed)));
            }
            Ok(())
        }
        Command::Export { layers, fibers } => {
            let census = load_census(o, &cfg)?;
            let (lo, hi) = parse_pair(&layers)
                .map(|(a, b)| (a as u32, b as u32))
                .ok_or_else(|| Failure::Usage(format!("bad layer range {layers}")))?;
            let format = match o.format {
                None | Some(FormatArg::Dot) => GraphFormat::Dot,
                Some(FormatArg::Graphml) => GraphFormat::GraphMl,
                Some(FormatArg::Json) => return Err(Failure::Usage("export writes dot or graphml".into())),
            };
            let atlas = fibers.then(|| BundleAtlas::new(&census, cfg.window));
            let mut w = output(o)?;
            export_graph(&census, (lo, hi), atlas.as_ref(), format, &mut w)?;
            w.flush()?;
            Ok(())
        }
        Command::Lowpath { pivot, from, to, push_up } => {
            let census = load_census(o, &cfg)?;
            let [a, b, b2] = [&pivot, &from, &to].map(|s| parse_curve(&census, s));
            let (a, b, b2) = (a?, b?, b2?);
            let lp = cfg.lowpath_config();
            if push_up {
                let rec = push_up_record(&census, &a, &b, &b2, &lp);
                emit(o, &rec)?;
                return match rec.outcome {
                    sphereprobe::lowpaths::Outcome::AuditFailure(m) => Err(Failure::Audit(m)),
                    sphereprobe::lowpaths::Outcome::CapExhausted(m) => Err(Failure::Cap(m)),
                    sphereprobe::lowpaths::Outcome::Passed => Ok(()),
                };
            }
            emit(o, &connect_above(&census, &a, &b, &b2, &lp)?)
        }
        Command::Medium { from, to } => {
            let census = load_census(o, &cfg)?;
            let (x, y) = (parse_curve(&census, &from)?, parse_curve(&census, &to)?);
            let view = restricted_view(&census)?;
            emit(o, &medium_sphere_path(&view, &x, &y, &cfg.medium_config())?)
        }
        Command::Bundle { op } => {
            let census = load_census(o, &cfg)?;
            let atlas = BundleAtlas::new(&census, cfg.window);
            match op {
                BundleOp::Chart { base } => emit(o, &*atlas.chart(&parse_curve(&census, &base)?)?),
                BundleOp::Pairing { first, second } => {
                    let (x1, x2) = (parse_curve(&census, &first)?, parse_curve(&census, &second)?);
                    emit(o, &*atlas.pairing(&x1, &x2)?)
                }
                BundleOp::Monodromy { via } if via.is_empty() => emit(o, &triangle_record(&atlas)?),
                BundleOp::Monodromy { via } => {
                    let path = via.iter().map(|s| parse_curve(&census, s)).collect::<Outcome<Vec<_>>>()?;
                    emit(o, &monodromy(&atlas, &path)?)
                }
                BundleOp::S2path { from, to } => {
                    let (v, w) = (parse_curve(&census, &from)?, parse_curve(&census, &to)?);
                    emit(o, &s2prime_path(&atlas, &v, &w)?)
                }
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Audit(m)) => {
            eprintln!("audit failure: {m}");
            ExitCode::from(EXIT_AUDIT)
        }
        Err(Failure::Cap(m)) => {
            eprintln!("cap exhausted: {m} (raise --cap or the relevant bound)");
            ExitCode::from(EXIT_CAP)
        }
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(EXIT_USAGE)
        }
    }
}
