use std::fmt::Write;

use super::json::path_data;
use super::{format_number as f, DrawStyle, Primitive, Scene, Shape};
use crate::label::Script;
use crate::layout::PT;
use crate::style::Color;

/// Pixels per internal unit at scale 1.
pub const PX_PER_UNIT: f64 = 0.35;
/// Margin around the drawing.
pub const MARGIN: f64 = 2.0 * PT;

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for ch in s.chars() {
        match ch {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            _ => out.push(ch),
        }
    }
    out
}

fn paint(c: Option<Color>) -> String {
    c.map_or_else(|| "none".to_string(), Color::hex)
}

fn stroke_attrs(st: &DrawStyle) -> String {
    let mut s = format!("fill=\"{}\" stroke=\"{}\" stroke-width=\"{}\"", paint(st.fill), paint(st.stroke), f(st.width));
    if st.dashed {
        let _ = write!(s, " stroke-dasharray=\"{} {}\"", f(3.0 * st.width.max(1.0)), f(3.0 * st.width.max(1.0)));
    }
    s
}

fn primitive(out: &mut String, p: &Primitive) {
    let st = &p.style;
    let _ = match &p.shape {
        Shape::Line { p1, p2 } => writeln!(
            out,
            "    <line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" {}/>",
            f(p1.0),
            f(p1.1),
            f(p2.0),
            f(p2.1),
            stroke_attrs(st)
        ),
        Shape::Polyline { pts } => {
            let pts: Vec<String> = pts.iter().map(|p| format!("{},{}", f(p.0), f(p.1))).collect();
            writeln!(out, "    <polyline points=\"{}\" {}/>", pts.join(" "), stroke_attrs(st))
        }
        Shape::Rect { rect, radius } => {
            let r = if *radius > 0.0 { format!(" rx=\"{}\"", f(*radius)) } else { String::new() };
            writeln!(
                out,
                "    <rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\"{r} {}/>",
                f(rect.x),
                f(rect.y),
                f(rect.w),
                f(rect.h),
                stroke_attrs(st)
            )
        }
        Shape::Circle { c, r } => {
            writeln!(out, "    <circle cx=\"{}\" cy=\"{}\" r=\"{}\" {}/>", f(c.0), f(c.1), f(*r), stroke_attrs(st))
        }
        Shape::Arc { c, r, a0, a1 } => {
            // y grows downwards, so angles are mirrored
            let at = |a: f64| (c.0 + r * a.to_radians().cos(), c.1 - r * a.to_radians().sin());
            let (s, e) = (at(*a0), at(*a1));
            let large = if (a1 - a0).abs() > 180.0 { 1 } else { 0 };
            let sweep = if a1 > a0 { 0 } else { 1 };
            writeln!(
                out,
                "    <path d=\"M {} {} A {} {} 0 {large} {sweep} {} {}\" {}/>",
                f(s.0),
                f(s.1),
                f(*r),
                f(*r),
                f(e.0),
                f(e.1),
                stroke_attrs(st)
            )
        }
        Shape::Path { segs } => writeln!(out, "    <path d=\"{}\" {}/>", path_data(segs), stroke_attrs(st)),
        Shape::Text { pos, runs, anchor, rotate } => {
            let rot = if *rotate != 0.0 {
                format!(" transform=\"rotate({} {} {})\"", f(*rotate), f(pos.0), f(pos.1))
            } else {
                String::new()
            };
            let _ = write!(
                out,
                "    <text x=\"{}\" y=\"{}\" font-size=\"{}\" fill=\"{}\" text-anchor=\"{}\" dominant-baseline=\"central\"{rot}>",
                f(pos.0),
                f(pos.1),
                f(st.font_size),
                paint(st.fill),
                anchor.name()
            );
            for r in runs {
                match r.script {
                    Script::Normal => out.push_str(&escape(&r.text)),
                    s => {
                        let shift = if s == Script::Sup { "super" } else { "sub" };
                        let _ = write!(
                            out,
                            "<tspan baseline-shift=\"{shift}\" font-size=\"{}\">{}</tspan>",
                            f(st.font_size * 0.7),
                            escape(&r.text)
                        );
                    }
                }
            }
            writeln!(out, "</text>")
        }
    };
}

/// Serializes a scene as a standalone SVG document.
pub fn emit_svg(scene: &Scene, scale: f64) -> String {
    let px = PX_PER_UNIT * scale;
    let vb = scene.bbox().map(|b| b.inflate(MARGIN, MARGIN));
    let mut out = String::from("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    let (x, y, w, h) = vb.map_or((0.0, 0.0, 0.0, 0.0), |b| (b.x, b.y, b.w, b.h));
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{}\" height=\"{}\" viewBox=\"{} {} {} {}\">",
        f(w * px),
        f(h * px),
        f(x),
        f(y),
        f(w),
        f(h)
    );
    if let Some(b) = scene.baseline {
        let _ = writeln!(out, "  <!-- baseline: {} -->", f(b));
    }
    if scene.primitives.is_empty() {
        out.push_str("  <g/>\n");
    } else {
        out.push_str("  <g font-family=\"serif\" stroke-linecap=\"butt\">\n");
        for p in &scene.primitives {
            primitive(&mut out, p);
        }
        out.push_str("  </g>\n");
    }
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::render::tests::scene_of;

    #[test]
    fn empty_scene() {
        let svg = emit_svg(&Scene::default(), 1.0);
        assert!(svg.contains("viewBox=\"0 0 0 0\""));
        assert!(svg.contains("<g/>"));
        roxmltree::Document::parse(&svg).unwrap();
    }

    #[test]
    fn two_h_gates_two_rects() {
        let svg = emit_svg(&scene_of(r"\lstick{$\ket{0}$} & \gate{H} & \gate{H} & \qw"), 1.0);
        let doc = roxmltree::Document::parse(&svg).unwrap();
        assert_eq!(doc.descendants().filter(|n| n.has_tag_name("rect")).count(), 2);
        assert_eq!(svg, emit_svg(&scene_of(r"\lstick{$\ket{0}$} & \gate{H} & \gate{H} & \qw"), 1.0));
    }

    #[test]
    fn scale_changes_size_only() {
        let s = scene_of(r"\gate{H}");
        let (a, b) = (emit_svg(&s, 1.0), emit_svg(&s, 2.0));
        let doc = |t: &str| {
            let d = roxmltree::Document::parse(t).unwrap();
            let root = d.root_element();
            (root.attribute("width").unwrap().parse::<f64>().unwrap(), root.attribute("viewBox").unwrap().to_string())
        };
        let ((wa, va), (wb, vb)) = (doc(&a), doc(&b));
        assert_eq!(va, vb);
        assert!((wb / wa - 2.0).abs() < 1e-4);
    }

    #[test]
    fn baseline_comment_and_escaping() {
        let svg = emit_svg(&scene_of(r"\gate{a<b \& c}"), 1.0);
        assert!(svg.contains("<!-- baseline: "));
        assert!(svg.contains("&lt;"));
        roxmltree::Document::parse(&svg).unwrap();
    }
}
