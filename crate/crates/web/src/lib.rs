//! Browser bindings: intersection numbers, twists and certified distances on
//! the preset surfaces. Every entry point takes curves as `p-q` (the curve
//! around two punctures) or comma-separated normal coordinates, and returns
//! a JSON string.

use std::sync::Arc;

use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

use sphereprobe::census::{distance, CensusConfig};
use sphereprobe::intersect::intersection;
use sphereprobe::mcg::{dehn_twist, half_twist};
use sphereprobe::projection::annular_distance;
use sphereprobe::{Curve, Preset, Surface};

/// Twist powers beyond this make curves too heavy for an interactive page.
pub const MAX_POWER: i64 = 200;

fn surface(name: &str) -> Result<Arc<Surface>, String> {
    Preset::from_name(name).map(|p| p.surface()).map_err(|e| e.to_string())
}

fn curve(s: &Arc<Surface>, spec: &str) -> Result<Curve, String> {
    let spec = spec.trim();
    if let Some((p, q)) = spec.split_once('-') {
        let (p, q) = (p.trim().parse::<u8>(), q.trim().parse::<u8>());
        if let (Ok(p), Ok(q)) = (p, q) {
            return Curve::standard(s, p, q).map_err(|e| e.to_string());
        }
    }
    let coords = spec
        .split(',')
        .map(|x| x.trim().parse::<u32>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(|_| format!("cannot read curve \"{spec}\""))?;
    Curve::from_coords(s, &coords).map_err(|e| e.to_string())
}

fn describe(c: &Curve) -> Value {
    json!({ "coords": c.coords(), "weight": c.weight(), "name": c.standard_name() })
}

fn check_power(n: i64) -> Result<(), String> {
    if n.abs() > MAX_POWER {
        return Err(format!("power must lie in [-{MAX_POWER}, {MAX_POWER}]"));
    }
    Ok(())
}

pub fn intersection_json(surface_name: &str, a: &str, b: &str) -> Result<Value, String> {
    let s = surface(surface_name)?;
    let (a, b) = (curve(&s, a)?, curve(&s, b)?);
    let i = intersection(&a, &b).map_err(|e| e.to_string())?;
    Ok(json!({ "a": describe(&a), "b": describe(&b), "intersection": i }))
}

/// `T_core^power(target)` or the half twist, with how far the image moved
/// in the annulus around the core.
pub fn twist_json(surface_name: &str, core: &str, target: &str, power: i64, half: bool) -> Result<Value, String> {
    check_power(power)?;
    let s = surface(surface_name)?;
    let (a, b) = (curve(&s, core)?, curve(&s, target)?);
    let image = if half { half_twist(&a, power, &b) } else { dehn_twist(&a, power, &b) }.map_err(|e| e.to_string())?;
    let moved = intersection(&image, &b).map_err(|e| e.to_string())?;
    let annular = if intersection(&a, &b).map_err(|e| e.to_string())? > 0 {
        Some(annular_distance(&a, &b, &image).map_err(|e| e.to_string())?)
    } else {
        None
    };
    Ok(json!({
        "image": describe(&image),
        "intersection_with_target": moved,
        "annular_distance": annular,
    }))
}

pub fn distance_json(surface_name: &str, a: &str, b: &str) -> Result<Value, String> {
    let s = surface(surface_name)?;
    let (a, b) = (curve(&s, a)?, curve(&s, b)?);
    let cert = distance(&a, &b, &CensusConfig::default()).map_err(|e| e.to_string())?;
    let semi = cert.semi_certified();
    Ok(json!({ "certificate": cert, "semi_certified": semi }))
}

fn to_js(r: Result<Value, String>) -> Result<String, JsValue> {
    r.map(|v| v.to_string()).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn intersection_number(surface: &str, a: &str, b: &str) -> Result<String, JsValue> {
    to_js(intersection_json(surface, a, b))
}

#[wasm_bindgen]
pub fn twist(surface: &str, core: &str, target: &str, power: i32, half: bool) -> Result<String, JsValue> {
    to_js(twist_json(surface, core, target, power as i64, half))
}

#[wasm_bindgen]
pub fn certified_distance(surface: &str, a: &str, b: &str) -> Result<String, JsValue> {
    to_js(distance_json(surface, a, b))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn intersections_of_standard_curves() {
        let v = intersection_json("s05-fig1", "1-2", "2-5").unwrap();
        assert_eq!(v["intersection"], 2);
        assert_eq!(intersection_json("s05-fig1", "1-2", "3-4").unwrap()["intersection"], 0);
        assert!(intersection_json("s07", "1-2", "3-4").is_err());
        assert!(intersection_json("s05-fig1", "1-2", "banana").is_err());
    }

    #[test]
    fn coordinates_and_names_agree() {
        let by_name = intersection_json("s05-fig1", "1-2", "2-5").unwrap();
        let coords: Vec<String> =
            by_name["b"]["coords"].as_array().unwrap().iter().map(|c| c.to_string()).collect();
        let by_coords = intersection_json("s05-fig1", "1-2", &coords.join(",")).unwrap();
        assert_eq!(by_name, by_coords);
    }

    #[test]
    fn twisting_moves_curves() {
        let v = twist_json("s05-fig1", "1-2", "2-5", 3, false).unwrap();
        // i(T^n b, b) = |n| i(a, b)^2.
        assert_eq!(v["intersection_with_target"], 12);
        let half = twist_json("s05-fig1", "1-2", "2-5", 1, true).unwrap();
        assert_eq!(half["image"]["name"], "P15");
        let fixed = twist_json("s05-fig1", "1-2", "3-4", 5, false).unwrap();
        assert_eq!(fixed["annular_distance"], Value::Null);
        assert!(twist_json("s05-fig1", "1-2", "2-5", 1000, false).is_err());
    }

    #[test]
    fn distances_are_certified() {
        let v = distance_json("s05-fig1", "1-2", "2-5").unwrap();
        assert_eq!(v["certificate"]["lo"], 2);
        assert_eq!(v["certificate"]["hi"], 2);
        assert_eq!(v["semi_certified"], false);
    }
}
