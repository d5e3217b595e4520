//! Verification suites over a census, each reported in the shared envelope.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::json;

use crate::bundle::{triangle_record, verify_bundle, verify_s2prime_paths, BundleAtlas};
use crate::census::SphereCensus;
use crate::curve::{Curve, CurveJson};
use crate::error::{Error, Result};
use crate::io::{CheckRecord, RunConfig, VerificationReport};
use crate::lowpaths::{verify_push_up, verify_wright_conditions, Outcome};
use crate::medium::verify_medium;
use crate::pentagon::{check_girth, complete_pentagon_edge, is_pentagon};
use crate::projection::verify_projection;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Suite {
    Girth,
    Pentagon,
    Lowpath,
    Medium,
    Bundle,
    Projection,
}

impl Suite {
    pub const ALL: [Suite; 6] =
        [Suite::Girth, Suite::Pentagon, Suite::Lowpath, Suite::Medium, Suite::Bundle, Suite::Projection];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Girth => "girth",
            Suite::Pentagon => "pentagon",
            Suite::Lowpath => "lowpath",
            Suite::Medium => "medium",
            Suite::Bundle => "bundle",
            Suite::Projection => "projection",
        }
    }

    /// Sub-checks accepted by `--check`.
    pub fn checks(self) -> &'static [&'static str] {
        match self {
            Suite::Lowpath => &["wright", "pushup"],
            Suite::Bundle => &["structure", "monodromy", "paths"],
            Suite::Projection => &["growth", "lipschitz", "bgi"],
            _ => &[],
        }
    }

    fn default_r(self) -> u32 {
        match self {
            Suite::Pentagon => 2,
            _ => 1,
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| Error::Precondition(format!("unknown suite {s}")))
    }
}

fn coords(cs: &[&CurveJson]) -> Vec<Vec<u32>> {
    cs.iter().map(|c| c.coords.clone()).collect()
}

fn census_coords(census: &SphereCensus, idx: &[usize]) -> Vec<Vec<u32>> {
    idx.iter().map(|&i| census.curve(i).coords().to_vec()).collect()
}

fn outcome_if(ok: bool, why: impl FnOnce() -> String) -> Outcome {
    if ok {
        Outcome::Passed
    } else {
        Outcome::AuditFailure(why())
    }
}

/// Runs `suite` on `census`. `check` restricts suites with several parts to
/// one of them.
pub fn run_suite(suite: Suite, census: &SphereCensus, cfg: &RunConfig, check: Option<&str>) -> Result<VerificationReport> {
    cfg.validate()?;
    if let Some(c) = check {
        if !suite.checks().contains(&c) {
            return Err(Error::Precondition(format!("suite {suite} has no check {c}")));
        }
    }
    let wants = |c: &str| check.is_none_or(|k| k == c);
    let r = cfg.r.unwrap_or(suite.default_r());
    let seed = cfg.seed;
    let mut report = VerificationReport::new(suite.name(), cfg);
    match suite {
        Suite::Girth => girth(census, seed, &mut report)?,
        Suite::Pentagon => pentagons(census, r, cfg, &mut report)?,
        Suite::Lowpath => {
            if wants("wright") {
                let rep = verify_wright_conditions(census, r, cfg.samples, seed, &cfg.lowpath_config())?;
                report.push(CheckRecord::new(
                    "adjacent-pairs",
                    Outcome::Passed,
                    json!({ "r": r, "count": rep.adjacent_pair_count }),
                ));
                for c in rep.connections {
                    let rec = CheckRecord::new("connect-above", c.outcome.clone(), &c);
                    report.push(rec.with_reproducer(coords(&[&c.pivot, &c.from, &c.to]), seed));
                }
                for p in rep.adjacent_pairs {
                    let rec = CheckRecord::new("pentagon-path", p.outcome.clone(), &p);
                    report.push(rec.with_reproducer(coords(&[&p.from, &p.to]), seed));
                }
            }
            if wants("pushup") {
                for p in verify_push_up(census, r, cfg.samples, seed, &cfg.lowpath_config())? {
                    let rec = CheckRecord::new("push-up", p.outcome.clone(), &p);
                    report.push(rec.with_reproducer(coords(&[&p.pivot, &p.from, &p.to]), seed));
                }
            }
        }
        Suite::Medium => {
            let rep = verify_medium(census, r, cfg.samples, seed, &cfg.medium_config())?;
            report.push(CheckRecord::new(
                "restricted-view",
                outcome_if(rep.view_agrees, || "restricted view disagrees with the census".into()),
                json!({ "r": r }),
            ));
            for o in &rep.far_sets {
                let ok = o.outside_layer == 0;
                let rec = CheckRecord::new("far-set", outcome_if(ok, || "far set leaves its layer".into()), o);
                report.push(rec.with_reproducer(coords(&[&o.z]), seed));
            }
            for p in &rep.paths {
                let rec = CheckRecord::new("sphere-path", p.outcome.clone(), p);
                report.push(rec.with_reproducer(coords(&[&p.from, &p.to]), seed));
            }
        }
        Suite::Bundle => bundle(census, cfg, &wants, &mut report)?,
        Suite::Projection => {
            let rep = verify_projection(census, cfg.samples, seed, &cfg.projection_config())?;
            if wants("growth") {
                for g in &rep.growth {
                    let rec = CheckRecord::new("twist-growth", g.outcome.clone(), g);
                    report.push(rec.with_reproducer(coords(&[&g.core, &g.curve]), seed));
                }
            }
            if wants("lipschitz") {
                for l in &rep.lipschitz {
                    let rec = CheckRecord::new("lipschitz", l.outcome.clone(), l);
                    report.push(rec.with_reproducer(coords(&[&l.pivot]), seed));
                }
            }
            if wants("bgi") {
                for b in &rep.bgi {
                    let rec = CheckRecord::new("bounded-geodesic-image", b.outcome.clone(), b);
                    report.push(rec.with_reproducer(coords(&[&b.core, &b.from, &b.to]), seed));
                }
            }
        }
    }
    Ok(report)
}

fn girth(census: &SphereCensus, seed: u64, report: &mut VerificationReport) -> Result<()> {
    let g = check_girth(census)?;
    let first = |cycles: Vec<Vec<usize>>| cycles.first().map(|c| census_coords(census, c)).unwrap_or_default();
    let tri: Vec<Vec<usize>> = g.triangles.iter().map(|c| c.to_vec()).collect();
    let quad: Vec<Vec<usize>> = g.quadrilaterals.iter().map(|c| c.to_vec()).collect();
    let bad: Vec<Vec<usize>> = g.non_pentagons.iter().map(|c| c.to_vec()).collect();
    let cap = census.cap();
    let rec = CheckRecord::new(
        "no-triangles",
        outcome_if(tri.is_empty(), || format!("{} triangles", tri.len())),
        json!({ "cap": cap, "count": tri.len() }),
    );
    report.push(rec.with_reproducer(first(tri), seed));
    let rec = CheckRecord::new(
        "no-quadrilaterals",
        outcome_if(quad.is_empty(), || format!("{} quadrilaterals", quad.len())),
        json!({ "cap": cap, "count": quad.len() }),
    );
    report.push(rec.with_reproducer(first(quad), seed));
    let rec = CheckRecord::new(
        "five-cycles-are-pentagons",
        outcome_if(bad.is_empty(), || format!("{} five-cycles fail the pentagon test", bad.len())),
        json!({ "cap": cap, "five_cycles": g.five_cycles, "non_pentagons": bad.len() }),
    );
    report.push(rec.with_reproducer(first(bad), seed));
    Ok(())
}

/// Completes sampled adjacent pairs of layer `r` to pentagons and re-audits
/// each completion.
fn pentagons(census: &SphereCensus, r: u32, cfg: &RunConfig, report: &mut VerificationReport) -> Result<()> {
    let mut pairs: Vec<(usize, usize)> = census
        .edges()
        .into_iter()
        .filter(|&(i, j)| census.layer_of(i) == Some(r) && census.layer_of(j) == Some(r))
        .collect();
    report.push(CheckRecord::new("adjacent-pairs", Outcome::Passed, json!({ "r": r, "count": pairs.len() })));
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    pairs.shuffle(&mut rng);
    pairs.truncate(cfg.samples);
    let records: Vec<CheckRecord> = pairs
        .par_iter()
        .map(|&(i, j)| {
            let (a1, a3) = (census.curve(i), census.curve(j));
            let outcome = match complete_pentagon_edge(census, a1, a3) {
                Ok(w) => audit_pentagon(census, r, &w.curves),
                Err(e) => (Outcome::from_error(&e), json!(null)),
            };
            CheckRecord::new("pentagon-edge", outcome.0, outcome.1)
                .with_reproducer(census_coords(census, &[i, j]), cfg.seed)
        })
        .collect();
    for rec in records {
        report.push(rec);
    }
    Ok(())
}

fn audit_pentagon(census: &SphereCensus, r: u32, curves: &[CurveJson]) -> (Outcome, serde_json::Value) {
    let cs: Result<Vec<Curve>> = curves.iter().map(|c| c.to_curve()).collect();
    let cs = match cs {
        Ok(cs) if cs.len() == 5 => cs,
        _ => return (Outcome::AuditFailure("malformed pentagon".into()), json!(null)),
    };
    let layers: Vec<Option<u32>> =
        cs.iter().map(|c| census.index_of(c).and_then(|i| census.layer_of(i))).collect();
    let detail = json!({ "curves": curves, "layers": layers });
    let tuple: [Curve; 5] = cs.try_into().expect("five curves");
    match is_pentagon(&tuple) {
        Ok(true) => {}
        Ok(false) => return (Outcome::AuditFailure("completion is not a pentagon".into()), detail),
        Err(e) => return (Outcome::from_error(&e), detail),
    }
    let others_ok = layers.iter().filter(|l| **l != Some(r)).all(|l| matches!(l, Some(x) if *x == r + 1 || *x == r + 2));
    (outcome_if(others_ok, || "pentagon leaves the two layers above".into()), detail)
}

fn bundle(
    census: &SphereCensus,
    cfg: &RunConfig,
    wants: &dyn Fn(&str) -> bool,
    report: &mut VerificationReport,
) -> Result<()> {
    let atlas = BundleAtlas::new(census, cfg.window);
    let seed = cfg.seed;
    if wants("structure") {
        let rep = verify_bundle(&atlas)?;
        let lists = [
            ("unique-backtrack", &rep.backtrack_failures),
            ("chop-down", &rep.chop_down_failures),
            ("fiber-decomposition", &rep.fiber_overlaps),
            ("charts-cover-fibers", &rep.uncharted),
        ];
        for (name, bad) in lists {
            let rec = CheckRecord::new(
                name,
                outcome_if(bad.is_empty(), || format!("{} curves fail", bad.len())),
                json!({ "nonisolated": rep.nonisolated, "fibers": rep.fibers, "failing": bad }),
            );
            let first: Vec<&CurveJson> = bad.iter().take(1).collect();
            report.push(rec.with_reproducer(coords(&first), seed));
        }
        for p in &rep.pairings {
            let rec = CheckRecord::new("pairing", p.outcome.clone(), p);
            report.push(rec.with_reproducer(coords(&[&p.first, &p.second]), seed));
        }
    }
    if wants("monodromy") {
        let (outcome, detail) = match triangle_record(&atlas) {
            Ok(t) => {
                let ok = t.closes_by_half_twist
                    && t.monodromy.abs() == 1
                    && t.reversed_monodromy == -t.monodromy
                    && t.basepoint_values.iter().all(|&v| v == t.monodromy);
                (outcome_if(ok, || "triangle monodromy is not a unit".into()), serde_json::to_value(&t).ok())
            }
            Err(e) => (Outcome::from_error(&e), None),
        };
        report.push(CheckRecord::new("triangle-monodromy", outcome, detail));
    }
    if wants("paths") {
        for p in verify_s2prime_paths(&atlas, cfg.samples, seed)? {
            let rec = CheckRecord::new("second-layer-path", p.outcome.clone(), &p);
            report.push(rec.with_reproducer(coords(&[&p.from, &p.to]), seed));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::census::build_census;
    use crate::surface::Preset;

    fn census16() -> SphereCensus {
        let s = Preset::S05Fig1.surface();
        build_census(&Curve::standard(&s, 1, 2).unwrap(), 16).unwrap()
    }

    #[test]
    fn suite_names_round_trip() {
        for s in Suite::ALL {
            assert_eq!(s.name().parse::<Suite>().unwrap(), s);
        }
        assert!("triangles".parse::<Suite>().is_err());
    }

    #[test]
    fn girth_and_checks() {
        let census = census16();
        let cfg = RunConfig { cap: 16, ..RunConfig::default() };
        let rep = run_suite(Suite::Girth, &census, &cfg, None).unwrap();
        assert_eq!(rep.records.len(), 3);
        assert_eq!(rep.summary().failed, 0);
        assert!(run_suite(Suite::Girth, &census, &cfg, Some("paths")).is_err());
        let mono = run_suite(Suite::Bundle, &census, &cfg, Some("monodromy")).unwrap();
        assert_eq!(mono.records.len(), 1);
        assert_eq!(mono.records[0].check, "triangle-monodromy");
    }

    #[test]
    fn failures_carry_reproducers() {
        let census = census16();
        let cfg = RunConfig { cap: 16, samples: 3, ..RunConfig::default() };
        let rep = run_suite(Suite::Pentagon, &census, &cfg, None).unwrap();
        for r in &rep.records {
            assert_eq!(r.reproducer.is_some(), r.outcome != Outcome::Passed);
        }
    }
}
