//! Run configuration, census caches, verification reports and graph
//! exports. Caches and reports are JSON lines.

use std::fmt::Write as _;
use std::io::{BufRead, Write};
use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::bundle::{fiber_labels, BundleAtlas};
use crate::census::{build_census_with, census_from_parts, CensusConfig, DistanceCertificate, SphereCensus};
use crate::curve::Curve;
use crate::error::{Error, Result};
use crate::lowpaths::{LowPathConfig, Outcome};
use crate::medium::MediumConfig;
use crate::projection::ProjectionConfig;
use crate::surface::Preset;

pub const CACHE_FORMAT: &str = "sphereprobe-census";
pub const CACHE_FORMAT_VERSION: u32 = 1;
pub const REPORT_SCHEMA_VERSION: u32 = 1;
pub const ENGINE_VERSION: &str = env!("CARGO_PKG_VERSION");
pub const CACHE_DIR_VAR: &str = "SPHEREPROBE_CACHE_DIR";

/// Everything a run depends on. A fixed seed makes a run deterministic.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunConfig {
    pub surface: Preset,
    /// The center surrounds these two punctures.
    pub center: [u8; 2],
    pub cap: u32,
    pub witness_bound: u32,
    pub max_curves: usize,
    /// Projection threshold; each suite has its own desk-scale default.
    pub bgi_m: Option<u32>,
    pub slack: Option<u32>,
    pub max_twist_power: i64,
    pub samples: usize,
    pub seed: u64,
    pub window: u32,
    pub complement_cap: u32,
    /// Layer index for the layered suites; each has its own default.
    pub r: Option<u32>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            surface: Preset::S05Fig1,
            center: [1, 2],
            cap: 24,
            witness_bound: CensusConfig::default().witness_bound,
            max_curves: CensusConfig::default().max_curves,
            bgi_m: None,
            slack: None,
            max_twist_power: 64,
            samples: 20,
            seed: 1,
            window: crate::bundle::DEFAULT_WINDOW,
            complement_cap: MediumConfig::default().complement_cap,
            r: None,
        }
    }
}

fn sha_hex(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    let mut out = String::with_capacity(64);
    for b in digest {
        let _ = write!(out, "{b:02x}");
    }
    out
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("cap", self.cap as u64),
            ("witness bound", self.witness_bound as u64),
            ("max curves", self.max_curves as u64),
            ("twist power cap", self.max_twist_power.max(0) as u64),
            ("window", self.window as u64),
            ("complement cap", self.complement_cap as u64),
        ];
        for (name, v) in positive {
            if v == 0 {
                return Err(Error::Precondition(format!("{name} must be positive")));
            }
        }
        if self.bgi_m == Some(0) || self.slack == Some(0) {
            return Err(Error::Precondition("projection threshold must be positive".into()));
        }
        self.center_curve().map(|_| ())
    }

    pub fn center_curve(&self) -> Result<Curve> {
        Curve::standard(&self.surface.surface(), self.center[0], self.center[1])
    }

    pub fn census_config(&self) -> CensusConfig {
        CensusConfig { witness_bound: self.witness_bound, max_curves: self.max_curves }
    }

    pub fn lowpath_config(&self) -> LowPathConfig {
        let d = LowPathConfig::default();
        LowPathConfig {
            projection: ProjectionConfig {
                m: self.bgi_m.unwrap_or(d.projection.m),
                slack: self.slack.unwrap_or(d.projection.slack),
                max_twist_power: self.max_twist_power,
            },
            distances: self.census_config(),
        }
    }

    pub fn projection_config(&self) -> ProjectionConfig {
        let d = ProjectionConfig::default();
        ProjectionConfig {
            m: self.bgi_m.unwrap_or(d.m),
            slack: self.slack.unwrap_or(d.slack),
            max_twist_power: self.max_twist_power,
        }
    }

    pub fn medium_config(&self) -> MediumConfig {
        let d = MediumConfig::default();
        MediumConfig {
            m: self.bgi_m.unwrap_or(d.m),
            slack: self.slack.unwrap_or(d.slack),
            complement_cap: self.complement_cap,
        }
    }

    /// Hash of the fields a census depends on.
    pub fn census_hash(&self) -> Result<String> {
        #[derive(Serialize)]
        struct Key<'a> {
            format: &'a str,
            version: u32,
            surface: Preset,
            center: Vec<u32>,
            cap: u32,
            witness_bound: u32,
            max_curves: usize,
        }
        let key = Key {
            format: CACHE_FORMAT,
            version: CACHE_FORMAT_VERSION,
            surface: self.surface,
            center: self.center_curve()?.coords().to_vec(),
            cap: self.cap,
            witness_bound: self.witness_bound,
            max_curves: self.max_curves,
        };
        Ok(sha_hex(&serde_json::to_vec(&key).map_err(|e| Error::Format(e.to_string()))?))
    }

    /// Hash of the whole configuration.
    pub fn config_hash(&self) -> String {
        sha_hex(&serde_json::to_vec(self).expect("configs serialize"))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CacheHeader {
    pub format: String,
    pub version: u32,
    pub surface: Preset,
    pub center: Vec<u32>,
    pub cap: u32,
    pub witness_bound: u32,
    pub max_curves: usize,
    pub curves: usize,
    pub config_hash: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CacheRecord {
    pub id: usize,
    pub coords: Vec<u32>,
    pub certificate: DistanceCertificate,
    pub neighbors: Vec<usize>,
}

fn io_err(e: impl std::fmt::Display) -> Error {
    Error::Io(e.to_string())
}

fn json_line<T: Serialize>(w: &mut impl Write, value: &T) -> Result<()> {
    serde_json::to_writer(&mut *w, value).map_err(|e| Error::Format(e.to_string()))?;
    w.write_all(b"\n").map_err(io_err)
}

pub fn write_census(census: &SphereCensus, cfg: &RunConfig, w: &mut impl Write) -> Result<()> {
    let header = CacheHeader {
        format: CACHE_FORMAT.into(),
        version: CACHE_FORMAT_VERSION,
        surface: cfg.surface,
        center: census.center().coords().to_vec(),
        cap: census.cap(),
        witness_bound: cfg.witness_bound,
        max_curves: cfg.max_curves,
        curves: census.len(),
        config_hash: cfg.census_hash()?,
    };
    json_line(w, &header)?;
    for (i, c) in census.curves().iter().enumerate() {
        let rec = CacheRecord {
            id: i,
            coords: c.coords().to_vec(),
            certificate: census.certificate(i).clone(),
            neighbors: census.neighbors(i).to_vec(),
        };
        json_line(w, &rec)?;
    }
    w.flush().map_err(io_err)
}

pub fn read_census_header(r: &mut impl BufRead) -> Result<CacheHeader> {
    let mut line = String::new();
    r.read_line(&mut line).map_err(io_err)?;
    let header: CacheHeader = serde_json::from_str(&line).map_err(|e| Error::Format(format!("cache header: {e}")))?;
    if header.format != CACHE_FORMAT || header.version != CACHE_FORMAT_VERSION {
        return Err(Error::Format(format!("unsupported cache {} v{}", header.format, header.version)));
    }
    Ok(header)
}

/// Reads a cache and checks it against `expected` when given. The census
/// is re-verified while loading.
pub fn read_census(r: &mut impl BufRead, expected: Option<&RunConfig>) -> Result<(CacheHeader, SphereCensus)> {
    let header = read_census_header(r)?;
    if let Some(cfg) = expected {
        if cfg.census_hash()? != header.config_hash {
            return Err(Error::Format("cache was built with a different configuration".into()));
        }
    }
    let s = header.surface.surface();
    let mut curves = Vec::with_capacity(header.curves);
    let mut certs = Vec::with_capacity(header.curves);
    let mut neighbors = Vec::with_capacity(header.curves);
    for (k, line) in r.lines().enumerate() {
        let line = line.map_err(io_err)?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: CacheRecord = serde_json::from_str(&line).map_err(|e| Error::Format(format!("record {k}: {e}")))?;
        if rec.id != k {
            return Err(Error::Format(format!("record {k} has id {}", rec.id)));
        }
        curves.push(Curve::from_coords(&s, &rec.coords)?);
        certs.push(rec.certificate);
        neighbors.push(rec.neighbors);
    }
    if curves.len() != header.curves {
        return Err(Error::Format(format!("expected {} records, found {}", header.curves, curves.len())));
    }
    let center = Curve::from_coords(&s, &header.center)?;
    let cfg = CensusConfig { witness_bound: header.witness_bound, max_curves: header.max_curves };
    let census = census_from_parts(&center, header.cap, &cfg, curves, certs, neighbors)?;
    Ok((header, census))
}

pub fn cache_dir() -> PathBuf {
    std::env::var_os(CACHE_DIR_VAR).map(PathBuf::from).unwrap_or_else(|| PathBuf::from(".sphereprobe-cache"))
}

pub fn cache_path(cfg: &RunConfig) -> Result<PathBuf> {
    let hash = cfg.census_hash()?;
    Ok(cache_dir().join(format!("census-{}-k{}-{}.jsonl", cfg.surface.name(), cfg.cap, &hash[..12])))
}

/// Loads the cached census for `cfg`, building and storing it if missing.
pub fn load_or_build(cfg: &RunConfig) -> Result<SphereCensus> {
    let path = cache_path(cfg)?;
    if let Ok(f) = std::fs::File::open(&path) {
        return Ok(read_census(&mut std::io::BufReader::new(f), Some(cfg))?.1);
    }
    let census = build_census_with(&cfg.center_curve()?, cfg.cap, &cfg.census_config())?;
    std::fs::create_dir_all(cache_dir()).map_err(io_err)?;
    let tmp = path.with_extension("tmp");
    {
        let mut f = std::io::BufWriter::new(std::fs::File::create(&tmp).map_err(io_err)?);
        write_census(&census, cfg, &mut f)?;
    }
    std::fs::rename(&tmp, &path).map_err(io_err)?;
    Ok(census)
}

/// One check inside a suite. Failures carry the curves and seed needed to
/// reproduce them.
#[derive(Clone, Debug, Serialize)]
pub struct CheckRecord {
    pub check: String,
    pub outcome: Outcome,
    pub detail: serde_json::Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reproducer: Option<Reproducer>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Reproducer {
    pub curves: Vec<Vec<u32>>,
    pub seed: u64,
}

impl CheckRecord {
    pub fn new(check: &str, outcome: Outcome, detail: impl Serialize) -> Self {
        CheckRecord {
            check: check.into(),
            outcome,
            detail: serde_json::to_value(detail).unwrap_or(serde_json::Value::Null),
            reproducer: None,
        }
    }

    pub fn with_reproducer(mut self, curves: Vec<Vec<u32>>, seed: u64) -> Self {
        if self.outcome != Outcome::Passed {
            self.reproducer = Some(Reproducer { curves, seed });
        }
        self
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Summary {
    pub total: usize,
    pub passed: usize,
    pub exhausted: usize,
    pub failed: usize,
}

/// Envelope shared by all suites.
#[derive(Clone, Debug, Serialize)]
pub struct VerificationReport {
    pub schema_version: u32,
    pub suite: String,
    pub engine_version: String,
    pub config_hash: String,
    pub config: RunConfig,
    pub records: Vec<CheckRecord>,
}

impl VerificationReport {
    pub fn new(suite: &str, cfg: &RunConfig) -> Self {
        VerificationReport {
            schema_version: REPORT_SCHEMA_VERSION,
            suite: suite.into(),
            engine_version: ENGINE_VERSION.into(),
            config_hash: cfg.config_hash(),
            config: cfg.clone(),
            records: Vec::new(),
        }
    }

    pub fn push(&mut self, rec: CheckRecord) {
        self.records.push(rec);
    }

    pub fn summary(&self) -> Summary {
        let mut s = Summary { total: self.records.len(), ..Summary::default() };
        for r in &self.records {
            match r.outcome {
                Outcome::Passed => s.passed += 1,
                Outcome::CapExhausted(_) => s.exhausted += 1,
                Outcome::AuditFailure(_) => s.failed += 1,
            }
        }
        s
    }

    /// Envelope line, one line per record, then the summary line.
    pub fn write_jsonl(&self, w: &mut impl Write) -> Result<()> {
        #[derive(Serialize)]
        struct Head<'a> {
            schema_version: u32,
            suite: &'a str,
            engine_version: &'a str,
            config_hash: &'a str,
            config: &'a RunConfig,
        }
        json_line(
            w,
            &Head {
                schema_version: self.schema_version,
                suite: &self.suite,
                engine_version: &self.engine_version,
                config_hash: &self.config_hash,
                config: &self.config,
            },
        )?;
        for r in &self.records {
            json_line(w, r)?;
        }
        json_line(w, &serde_json::json!({ "summary": self.summary() }))?;
        w.flush().map_err(io_err)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GraphFormat {
    Dot,
    GraphMl,
}

/// Census vertices with layer in `layers` (inclusive), with census edges
/// between them. Bundle annotations add each second-layer vertex's fiber
/// base and index.
pub fn export_graph(
    census: &SphereCensus,
    layers: (u32, u32),
    atlas: Option<&BundleAtlas>,
    format: GraphFormat,
    w: &mut impl Write,
) -> Result<()> {
    let keep: Vec<usize> = (0..census.len())
        .filter(|&i| matches!(census.layer_of(i), Some(l) if l >= layers.0 && l <= layers.1))
        .collect();
    let labels = match atlas {
        Some(a) => fiber_labels(a)?,
        None => Default::default(),
    };
    let fiber_id = |i: usize| -> Option<(String, Option<i64>)> {
        labels.get(&i).map(|(x, z)| {
            let id = census.index_of(x).map_or_else(|| format!("{:?}", x.coords()), |k| format!("v{k}"));
            (id, *z)
        })
    };
    let edges: Vec<(usize, usize)> = keep
        .iter()
        .flat_map(|&i| census.neighbors(i).iter().map(move |&j| (i, j)))
        .filter(|&(i, j)| i < j && keep.binary_search(&j).is_ok())
        .collect();
    // Pairs in the first layer meeting twice are the Farey edges of the link
    // of the center; they are drawn as a second edge kind.
    let farey: Vec<(usize, usize)> = keep
        .iter()
        .filter(|&&i| census.layer_of(i) == Some(1))
        .flat_map(|&i| keep.iter().map(move |&j| (i, j)))
        .filter(|&(i, j)| i < j && census.layer_of(j) == Some(1) && census.intersection(i, j) == 2)
        .collect();
    let coords = |i: usize| {
        census.curve(i).coords().iter().map(|c| c.to_string()).collect::<Vec<_>>().join(",")
    };
    let layer = |i: usize| census.layer_of(i).map_or("?".to_string(), |l| l.to_string());
    let mut out = String::new();
    match format {
        GraphFormat::Dot => {
            let _ = writeln!(out, "graph census {{");
            let _ = writeln!(out, "  // surface {} cap {} layers {}..{}", census.surface().id(), census.cap(), layers.0, layers.1);
            for &i in &keep {
                let mut attrs = format!("label=\"v{i}\\n{}\" coords=\"{}\" layer={}", layer(i), coords(i), layer(i));
                if let Some((f, z)) = fiber_id(i) {
                    let _ = write!(attrs, " fiber=\"{f}\"");
                    if let Some(z) = z {
                        let _ = write!(attrs, " zeta={z}");
                    }
                }
                let _ = writeln!(out, "  v{i} [{attrs}];");
            }
            for (i, j) in edges {
                let _ = writeln!(out, "  v{i} -- v{j};");
            }
            for (i, j) in farey {
                let _ = writeln!(out, "  v{i} -- v{j} [style=dashed kind=farey];");
            }
            out.push_str("}\n");
        }
        GraphFormat::GraphMl => {
            out.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
            out.push_str("<graphml xmlns=\"http://graphml.graphdrawing.org/xmlns\">\n");
            for (key, ty) in [("coords", "string"), ("layer", "int"), ("fiber", "string"), ("zeta", "int")] {
                let _ = writeln!(out, "  <key id=\"{key}\" for=\"node\" attr.name=\"{key}\" attr.type=\"{ty}\"/>");
            }
            out.push_str("  <key id=\"kind\" for=\"edge\" attr.name=\"kind\" attr.type=\"string\"/>\n");
            let _ = writeln!(out, "  <graph id=\"census\" edgedefault=\"undirected\">");
            for &i in &keep {
                let _ = writeln!(out, "    <node id=\"v{i}\">");
                let _ = writeln!(out, "      <data key=\"coords\">{}</data>", coords(i));
                let _ = writeln!(out, "      <data key=\"layer\">{}</data>", layer(i));
                if let Some((f, z)) = fiber_id(i) {
                    let _ = writeln!(out, "      <data key=\"fiber\">{f}</data>");
                    if let Some(z) = z {
                        let _ = writeln!(out, "      <data key=\"zeta\">{z}</data>");
                    }
                }
                out.push_str("    </node>\n");
            }
            for (i, j) in edges {
                let _ = writeln!(out, "    <edge source=\"v{i}\" target=\"v{j}\"/>");
            }
            for (i, j) in farey {
                let _ = writeln!(out, "    <edge source=\"v{i}\" target=\"v{j}\"><data key=\"kind\">farey</data></edge>");
            }
            out.push_str("  </graph>\n</graphml>\n");
        }
    }
    w.write_all(out.as_bytes()).map_err(io_err)
}
