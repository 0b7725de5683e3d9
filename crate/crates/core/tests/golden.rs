//! Checked-in JSON scenes for the corpus. Set `QTKZ_BLESS=1` to rewrite them.

mod common;

use std::collections::BTreeMap;

use common::*;
use quantikz::render::emit_svg;

#[test]
fn goldens_match() {
    let bless = std::env::var_os("QTKZ_BLESS").is_some_and(|v| v == "1");
    let mut stale = Vec::new();
    for p in corpus() {
        let json = json_of(&p);
        let golden = golden_path(&p);
        if bless {
            std::fs::write(&golden, &json).unwrap();
            continue;
        }
        match std::fs::read_to_string(&golden) {
            Ok(g) if g == json => {}
            _ => stale.push(stem(&p)),
        }
    }
    assert!(stale.is_empty(), "goldens differ or are missing: {stale:?}");
}

#[test]
fn no_orphan_goldens() {
    let names: Vec<String> = corpus().iter().map(|p| stem(p)).collect();
    for e in std::fs::read_dir(dir("golden")).unwrap() {
        let p = e.unwrap().path();
        assert!(names.contains(&stem(&p)), "golden without a circuit: {}", p.display());
    }
}

#[test]
fn rendering_is_deterministic() {
    for p in corpus() {
        assert_eq!(json_of(&p), json_of(&p), "{}", p.display());
        let (a, b) = (compile_file(&p), compile_file(&p));
        assert_eq!(emit_svg(&a.scene, 1.0), emit_svg(&b.scene, 1.0), "{}", p.display());
    }
}

#[test]
fn svg_is_well_formed() {
    for p in corpus() {
        let svg = emit_svg(&compile_file(&p).scene, 1.5);
        let doc = roxmltree::Document::parse(&svg).unwrap_or_else(|e| panic!("{}: {e}", p.display()));
        let root = doc.root_element();
        assert_eq!(root.tag_name().name(), "svg");
        let vb: Vec<f64> = root.attribute("viewBox").unwrap().split(' ').map(|v| v.parse().unwrap()).collect();
        assert!(vb[2] > 0.0 && vb[3] > 0.0, "{}", p.display());
    }
}

/// Pairs whose sources differ but whose drawings must coincide.
const SAME_DRAWING: [(&str, &str); 2] = [
    // halfway between two equal rows is the default middle
    ("align_at_lhs", "align_default_lhs"),
    ("align_at_rhs", "align_default_rhs"),
];

#[test]
fn distinct_circuits_give_distinct_scenes() {
    let mut seen: BTreeMap<String, String> = BTreeMap::new();
    for p in corpus() {
        if let Some(other) = seen.insert(json_of(&p), stem(&p)) {
            let pair = if other < stem(&p) { (other.clone(), stem(&p)) } else { (stem(&p), other.clone()) };
            assert!(
                SAME_DRAWING.iter().any(|&(a, b)| (a, b) == (pair.0.as_str(), pair.1.as_str())),
                "{} and {other} render identically",
                stem(&p)
            );
        }
    }
    let path = |n: &str| dir("corpus").join(format!("{n}.qtz"));
    for (a, b) in SAME_DRAWING {
        assert_eq!(json_of(&path(a)), json_of(&path(b)));
    }
}

#[test]
fn json_round_trips_through_serde() {
    for p in corpus() {
        let v: serde_json::Value = serde_json::from_str(&json_of(&p)).unwrap();
        let prims = v["primitives"].as_array().unwrap();
        assert!(!prims.is_empty(), "{}", p.display());
        for prim in prims {
            let keys: Vec<&str> = prim.as_object().unwrap().keys().map(String::as_str).collect();
            assert_eq!(keys, ["geometry", "kind", "layer", "style"]);
        }
    }
}
