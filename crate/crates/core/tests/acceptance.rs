//! Acceptance run: one line per criterion, nonzero exit if any fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use sphereprobe::bundle::{triangle_record, verify_bundle, verify_s2prime_paths, BundleAtlas};
use sphereprobe::census::{build_census, distance, CensusConfig, LowerEvidence, SphereCensus};
use sphereprobe::intersect::intersection;
use sphereprobe::lowpaths::{push_up_record, verify_push_up, verify_wright_conditions, LowPathConfig, Outcome};
use sphereprobe::mcg::dehn_twist;
use sphereprobe::medium::{verify_medium, MediumConfig};
use sphereprobe::pentagon::check_girth;
use sphereprobe::projection::{verify_projection, ProjectionConfig};
use sphereprobe::{Curve, Preset};

const SEED: u64 = 1;
const CAP: u32 = 24;
const DOUBLED_CAP: u32 = 32;
const WINDOW: u32 = 16;

const ORACLE_PAIRS: usize = 200;
const ORACLE_POWERS: [i64; 10] = [-5, -4, -3, -2, -1, 1, 2, 3, 4, 5];
const PATH_SAMPLES: usize = 50;
/// Strictly below this fraction of path samples may exhaust a cap.
const PATH_EXHAUSTION: f64 = 0.10;
const PUSH_UP_SAMPLES: usize = 20;
const WRIGHT_SAMPLES: usize = 20;
const MEDIUM_CAP: u32 = 18;
const MEDIUM_SAMPLES: usize = 10;
const PROJECTION_SAMPLES: usize = 50;

type Check = Result<String, String>;

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn fig1_census(cap: u32) -> SphereCensus {
    let s = Preset::S05Fig1.surface();
    build_census(&Curve::standard(&s, 1, 2).unwrap(), cap).unwrap()
}

fn girth(census: &SphereCensus) -> Check {
    let g = check_girth(census).map_err(|e| e.to_string())?;
    let line = format!(
        "{} triangles, {} quadrilaterals, {} of {} five-cycles fail the pentagon test",
        g.triangles.len(),
        g.quadrilaterals.len(),
        g.non_pentagons.len(),
        g.five_cycles
    );
    ensure(g.passed() && g.five_cycles > 0, line.clone())?;
    Ok(line)
}

fn twist_oracle(census: &SphereCensus) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let n = census.len();
    let mut pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .filter(|&(i, j)| matches!(census.intersection(i, j), 2 | 4))
        .collect();
    pairs.shuffle(&mut rng);
    ensure(pairs.len() >= ORACLE_PAIRS, format!("only {} pairs meet 2 or 4 times", pairs.len()))?;
    let mut mismatches = 0;
    for &(i, j) in &pairs[..ORACLE_PAIRS] {
        let (a, b) = (census.curve(i), census.curve(j));
        let k = census.intersection(i, j);
        for n in ORACLE_POWERS {
            let t = dehn_twist(a, n, b).map_err(|e| e.to_string())?;
            if intersection(&t, b).map_err(|e| e.to_string())? != n.unsigned_abs() * k * k {
                mismatches += 1;
            }
        }
    }
    let line = format!("{} pairs x {} powers, {mismatches} mismatches", ORACLE_PAIRS, ORACLE_POWERS.len());
    ensure(mismatches == 0, line.clone())?;
    Ok(line)
}

fn named(c: &sphereprobe::curve::CurveJson) -> String {
    c.to_curve().ok().and_then(|c| c.standard_name()).unwrap_or_else(|| format!("{:?}", c.coords))
}

fn figure_two(census: &SphereCensus) -> Check {
    let atlas = BundleAtlas::new(census, WINDOW);
    let t = triangle_record(&atlas).map_err(|e| e.to_string())?;
    let first = named(&t.images[0]);
    let around = named(&t.images[2]);
    let line = format!(
        "psi12(P25) = {first}, psi31 psi23 psi12(P25) = {around}, half twist gives {}, monodromy {} (reversed {})",
        named(&t.half_twist_image),
        t.monodromy,
        t.reversed_monodromy
    );
    ensure(first == "P14" && around == "P15" && t.closes_by_half_twist, line.clone())?;
    // The recorded orientation gives +1; a unit value is what matters.
    ensure(t.monodromy.abs() == 1 && t.reversed_monodromy == -t.monodromy, line.clone())?;
    ensure(t.basepoint_values.iter().all(|&v| v == t.monodromy), format!("{line}; basepoints {:?}", t.basepoint_values))?;
    ensure(t.monodromy == 1, format!("{line}; sign differs from the recorded convention"))?;
    Ok(line)
}

fn bundle_structure(census: &SphereCensus) -> Check {
    let atlas = BundleAtlas::new(census, WINDOW);
    let r = verify_bundle(&atlas).map_err(|e| e.to_string())?;
    let bad_pairings = r.pairings.iter().filter(|p| p.outcome != Outcome::Passed).count();
    let line = format!(
        "{} non-isolated curves in {} fibers; {} backtrack, {} chop-down, {} overlap, {} uncharted failures; {} of {} pairings fail",
        r.nonisolated,
        r.fibers,
        r.backtrack_failures.len(),
        r.chop_down_failures.len(),
        r.fiber_overlaps.len(),
        r.uncharted.len(),
        bad_pairings,
        r.pairings.len()
    );
    ensure(r.passed() && bad_pairings == 0 && r.nonisolated > 0, line.clone())?;
    Ok(line)
}

fn second_layer_paths(census: &SphereCensus) -> Check {
    let run = |census: &SphereCensus| {
        let atlas = BundleAtlas::new(census, WINDOW);
        verify_s2prime_paths(&atlas, PATH_SAMPLES, SEED).map_err(|e| e.to_string())
    };
    let count = |recs: &[sphereprobe::bundle::BundlePathRecord]| {
        let failed = recs.iter().filter(|r| matches!(r.outcome, Outcome::AuditFailure(_))).count();
        let exhausted = recs.iter().filter(|r| matches!(r.outcome, Outcome::CapExhausted(_))).count();
        (failed, exhausted)
    };
    let recs = run(census)?;
    let (mut failed, mut exhausted) = count(&recs);
    let mut cap = census.cap();
    if exhausted as f64 >= PATH_EXHAUSTION * PATH_SAMPLES as f64 {
        let bigger = fig1_census(DOUBLED_CAP);
        (failed, exhausted) = count(&run(&bigger)?);
        cap = DOUBLED_CAP;
    }
    let line = format!("{PATH_SAMPLES} pairs at cap {cap}: {failed} audit failures, {exhausted} exhausted");
    ensure(failed == 0 && (exhausted as f64) < PATH_EXHAUSTION * PATH_SAMPLES as f64, line.clone())?;
    Ok(line)
}

fn push_ups(census: &SphereCensus, doubled: &SphereCensus) -> Check {
    let cfg = LowPathConfig::default();
    let recs = verify_push_up(census, 2, PUSH_UP_SAMPLES, SEED, &cfg).map_err(|e| e.to_string())?;
    let not_passed = recs.iter().filter(|r| r.outcome != Outcome::Passed).count();
    // The twist power is a search artifact and may move with the cap; the
    // audited properties may not.
    let verdict = |a: &Option<sphereprobe::lowpaths::PushUpAudit>| {
        a.as_ref().map(|a| (a.pivot_range, a.center_range, a.unique_backtrack, a.no_sidestep))
    };
    let mut unstable = 0;
    let mut shifted = 0;
    for r in &recs {
        let [a, b, b2] = [&r.pivot, &r.from, &r.to].map(|c| c.to_curve().unwrap());
        let again = push_up_record(doubled, &a, &b, &b2, &cfg);
        if again.outcome != r.outcome || verdict(&again.audit) != verdict(&r.audit) {
            unstable += 1;
        }
        if again.twist_power != r.twist_power {
            shifted += 1;
        }
    }
    // Distances resting on exhaustion must survive a doubled witness bound.
    let base = CensusConfig::default();
    let doubled_w = CensusConfig { witness_bound: 2 * base.witness_bound, ..base };
    let mut backed = 0;
    let mut moved = 0;
    for r in &recs {
        for n in &r.notes {
            if matches!(n.to_center.lower_evidence, LowerEvidence::Exhaustion { .. }) {
                backed += 1;
                let x = n.curve.to_curve().unwrap();
                let d = distance(&x, census.center(), &doubled_w).map_err(|e| e.to_string())?;
                if d.lo != n.to_center.lo || d.hi > n.to_center.hi {
                    moved += 1;
                }
            }
        }
    }
    let line = format!(
        "{} triples at r=2: {not_passed} not passed, {unstable} change verdict at cap {DOUBLED_CAP} ({shifted} pick another power); {backed} exhaustion-backed distances, {moved} change at W={}",
        recs.len(),
        doubled_w.witness_bound
    );
    ensure(recs.len() == PUSH_UP_SAMPLES && not_passed == 0 && unstable == 0 && moved == 0, line.clone())?;
    Ok(line)
}

fn wright(census: &SphereCensus) -> Check {
    let r = verify_wright_conditions(census, 1, WRIGHT_SAMPLES, SEED, &LowPathConfig::default())
        .map_err(|e| e.to_string())?;
    let line = format!(
        "{} outward connections at r=1: {} failures, {} exhausted; {} adjacent pairs in layer 1, so the pentagon condition is vacuous",
        r.connections.len(),
        r.failures(),
        r.exhausted(),
        r.adjacent_pair_count
    );
    ensure(r.passed() && r.connections.len() == WRIGHT_SAMPLES, line.clone())?;
    Ok(line)
}

fn medium() -> Check {
    let s = Preset::S06Sorted.surface();
    let census = build_census(&Curve::standard(&s, 1, 2).unwrap(), MEDIUM_CAP).map_err(|e| e.to_string())?;
    let r = verify_medium(&census, 1, MEDIUM_SAMPLES, SEED, &MediumConfig::default()).map_err(|e| e.to_string())?;
    let outside: usize = r.far_sets.iter().map(|o| o.outside_layer).sum();
    let passed = r.paths.iter().filter(|p| p.outcome == Outcome::Passed).count();
    let line = format!(
        "cap {MEDIUM_CAP}: {} far sets with {outside} members outside layer 2; {passed} of {} paths stay in layer 2",
        r.far_sets.len(),
        r.paths.len()
    );
    ensure(r.view_agrees && outside == 0 && !r.far_sets.is_empty(), line.clone())?;
    ensure(r.paths.len() == MEDIUM_SAMPLES && passed == MEDIUM_SAMPLES, line.clone())?;
    Ok(line)
}

fn projections(census: &SphereCensus) -> Check {
    let cfg = ProjectionConfig::default();
    let r = verify_projection(census, PROJECTION_SAMPLES, SEED, &cfg).map_err(|e| e.to_string())?;
    let grown = r.growth.iter().filter(|g| g.outcome == Outcome::Passed).count();
    let edges: usize = r.lipschitz.iter().map(|l| l.edges).sum();
    let worst = r.lipschitz.iter().map(|l| l.max_lo).max().unwrap_or(0);
    let bgi = r.bgi.iter().filter(|b| b.outcome == Outcome::Passed).count();
    let line = format!(
        "twist growth {grown}/{}; Lipschitz over {} pivots and {edges} edge checks, largest d_U {worst}; BGI {bgi}/{} geodesics at M={}; {} contradictions, {} exhausted",
        r.growth.len(),
        r.lipschitz.len(),
        r.bgi.len(),
        cfg.m,
        r.failures(),
        r.exhausted()
    );
    ensure(r.failures() == 0 && bgi == PROJECTION_SAMPLES && grown == PROJECTION_SAMPLES, line.clone())?;
    Ok(line)
}

fn main() -> ExitCode {
    let start = Instant::now();
    let census = fig1_census(CAP);
    let doubled = fig1_census(DOUBLED_CAP);
    let criteria: Vec<(&str, Box<dyn Fn() -> Check + '_>)> = vec![
        ("girth", Box::new(|| girth(&census))),
        ("intersection oracle", Box::new(|| twist_oracle(&census))),
        ("fundamental triangle", Box::new(|| figure_two(&census))),
        ("bundle structure", Box::new(|| bundle_structure(&census))),
        ("second-layer paths", Box::new(|| second_layer_paths(&census))),
        ("push-up", Box::new(|| push_ups(&census, &doubled))),
        ("outward connections", Box::new(|| wright(&census))),
        ("medium sphere", Box::new(medium)),
        ("projections", Box::new(|| projections(&census))),
    ];
    let mut failed = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let res = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|p| {
            let msg = p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        let secs = t.elapsed().as_secs_f64();
        match res {
            Ok(line) => println!("PASS {} {name}: {line} ({secs:.1}s)", k + 1),
            Err(line) => {
                failed += 1;
                println!("FAIL {} {name}: {line} ({secs:.1}s)", k + 1);
            }
        }
    }
    println!("acceptance: {} of {} criteria pass ({:.1}s)", criteria.len() - failed, criteria.len(), start.elapsed().as_secs_f64());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
