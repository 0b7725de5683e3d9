//! Canonical JSON scene: sorted keys, fixed number formatting, one
//! primitive per line.

use std::collections::BTreeMap;
use std::fmt::Write;

use super::{DrawStyle, Point, Primitive, Scene, Seg, Shape};
use crate::style::Color;

/// Formats a number with at most 6 significant digits and no trailing
/// zeros, never in exponent form. Values within 1e-9 of zero print as `0`.
pub fn format_number(x: f64) -> String {
    if !x.is_finite() || x.abs() < 1e-9 {
        return "0".to_string();
    }
    let magnitude = x.abs().log10().floor() as i32;
    let decimals = 5 - magnitude;
    let s = if decimals >= 0 {
        format!("{:.*}", decimals as usize, x)
    } else {
        let p = 10f64.powi(-decimals);
        format!("{:.0}", (x / p).round() * p)
    };
    let s = if s.contains('.') { s.trim_end_matches('0').trim_end_matches('.').to_string() } else { s };
    if s == "-0" {
        "0".to_string()
    } else {
        s
    }
}

enum J {
    Num(f64),
    Str(String),
    Bool(bool),
    Arr(Vec<J>),
    Obj(BTreeMap<&'static str, J>),
}

impl J {
    fn write(&self, out: &mut String) {
        match self {
            J::Num(x) => out.push_str(&format_number(*x)),
            J::Str(s) => out.push_str(&serde_json::to_string(s).expect("string serializes")),
            J::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
            J::Arr(items) => {
                out.push('[');
                for (i, it) in items.iter().enumerate() {
                    if i > 0 {
                        out.push(',');
                    }
                    it.write(out);
                }
                out.push(']');
            }
            J::Obj(map) => {
                out.push('{');
                for (i, (k, v)) in map.iter().enumerate() {
                    if i > 0 {
                        out.push(',');
                    }
                    let _ = write!(out, "\"{k}\":");
                    v.write(out);
                }
                out.push('}');
            }
        }
    }
}

fn pt(p: Point) -> J {
    J::Arr(vec![J::Num(p.0), J::Num(p.1)])
}

fn color(c: Option<Color>) -> J {
    J::Str(c.map_or_else(|| "none".to_string(), Color::hex))
}

fn obj<const N: usize>(pairs: [(&'static str, J); N]) -> J {
    J::Obj(pairs.into_iter().collect())
}

/// SVG-style path data, shared with the SVG writer.
pub(super) fn path_data(segs: &[Seg]) -> String {
    let f = format_number;
    let p = |(x, y): Point| format!("{} {}", f(x), f(y));
    segs.iter()
        .map(|s| match *s {
            Seg::Move(a) => format!("M {}", p(a)),
            Seg::LineTo(a) => format!("L {}", p(a)),
            Seg::Quad(a, b) => format!("Q {} {}", p(a), p(b)),
            Seg::Cubic(a, b, c) => format!("C {} {} {}", p(a), p(b), p(c)),
            Seg::Close => "Z".to_string(),
        })
        .collect::<Vec<_>>()
        .join(" ")
}

fn geometry(shape: &Shape) -> J {
    match shape {
        Shape::Line { p1, p2 } => obj([("p1", pt(*p1)), ("p2", pt(*p2))]),
        Shape::Polyline { pts } => obj([("points", J::Arr(pts.iter().map(|p| pt(*p)).collect()))]),
        Shape::Rect { rect, radius } => obj([
            ("h", J::Num(rect.h)),
            ("radius", J::Num(*radius)),
            ("w", J::Num(rect.w)),
            ("x", J::Num(rect.x)),
            ("y", J::Num(rect.y)),
        ]),
        Shape::Circle { c, r } => obj([("c", pt(*c)), ("r", J::Num(*r))]),
        Shape::Arc { c, r, a0, a1 } => {
            obj([("a0", J::Num(*a0)), ("a1", J::Num(*a1)), ("c", pt(*c)), ("r", J::Num(*r))])
        }
        Shape::Path { segs } => obj([("d", J::Str(path_data(segs)))]),
        Shape::Text { pos, runs, anchor, rotate } => {
            let runs = runs
                .iter()
                .map(|r| obj([("script", J::Str(r.script.name().into())), ("text", J::Str(r.text.clone()))]))
                .collect();
            obj([
                ("anchor", J::Str(anchor.name().into())),
                ("pos", pt(*pos)),
                ("rotate", J::Num(*rotate)),
                ("runs", J::Arr(runs)),
            ])
        }
    }
}

fn style(st: &DrawStyle, text: bool) -> J {
    if text {
        return obj([("fill", color(st.fill)), ("size", J::Num(st.font_size))]);
    }
    obj([
        ("dashed", J::Bool(st.dashed)),
        ("fill", color(st.fill)),
        ("stroke", color(st.stroke)),
        ("width", J::Num(st.width)),
    ])
}

fn primitive(p: &Primitive) -> J {
    obj([
        ("geometry", geometry(&p.shape)),
        ("kind", J::Str(p.kind.name().into())),
        ("layer", J::Str(p.layer.name().into())),
        ("style", style(&p.style, matches!(p.shape, Shape::Text { .. }))),
    ])
}

/// Serializes a scene. The empty scene is exactly `{"primitives": []}`.
pub fn emit_json(scene: &Scene) -> String {
    let mut out = String::from("{");
    if let Some(b) = scene.baseline {
        let _ = write!(out, "\"baseline\": {}, ", format_number(b));
    }
    out.push_str("\"primitives\": [");
    for (i, p) in scene.primitives.iter().enumerate() {
        out.push_str(if i == 0 { "\n  " } else { ",\n  " });
        primitive(p).write(&mut out);
    }
    if !scene.primitives.is_empty() {
        out.push('\n');
    }
    out.push_str("]}");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::render::{DrawStyle, Kind, Layer};

    #[test]
    fn numbers() {
        let cases = [
            (0.0, "0"),
            (-0.0, "0"),
            (1.0, "1"),
            (-2.5, "-2.5"),
            (35.14589, "35.1459"),
            (3.514589, "3.51459"),
            (1234567.0, "1234570"),
            (0.000123456789, "0.000123457"),
            (100.0, "100"),
            (1e-12, "0"),
            (999999.7, "1000000"),
        ];
        for (x, want) in cases {
            assert_eq!(format_number(x), want, "{x}");
        }
    }

    #[test]
    fn empty_scene() {
        assert_eq!(emit_json(&Scene::default()), r#"{"primitives": []}"#);
    }

    #[test]
    fn single_line() {
        let style = DrawStyle { stroke: Some(Color::BLACK), fill: None, width: 2.0, dashed: false, font_size: 0.0 };
        let scene = Scene {
            primitives: vec![Primitive {
                layer: Layer::Wires,
                kind: Kind::Line,
                shape: Shape::Line { p1: (0.0, 1.0), p2: (10.5, 1.0) },
                style,
            }],
            baseline: None,
        };
        let json = emit_json(&scene);
        let v: serde_json::Value = serde_json::from_str(&json).unwrap();
        let p = &v["primitives"][0];
        assert_eq!(p["kind"], "line");
        assert_eq!(p["geometry"]["p1"], serde_json::json!([0, 1]));
        assert_eq!(p["geometry"]["p2"], serde_json::json!([10.5, 1]));
        assert_eq!(p["style"]["fill"], "none");
        assert!(json.contains(r#"{"geometry":{"p1":[0,1],"p2":[10.5,1]},"kind":"line","layer":"wires","style""#));
    }

    #[test]
    fn path_data_format() {
        let d = path_data(&[Seg::Move((0.0, 0.0)), Seg::Quad((1.5, -2.0), (3.0, 0.0)), Seg::Close]);
        assert_eq!(d, "M 0 0 Q 1.5 -2 3 0 Z");
    }
}
