//! Turns a laid-out circuit into an ordered list of drawing primitives.

mod json;
mod svg;

pub use json::{emit_json, format_number};
pub use svg::emit_svg;

use crate::label::{parse_label, Line};
use crate::layout::{glyph, LayoutResult, Rect, TextMetrics, PT};
use crate::model::{Element, LinkKind, MeterVariant, PortLabel, ResolvedCircuit, SegmentKind, StickSide, VerticalLink};
use crate::style::{parse_style, Anchor, Color, LabelPosition, NodeStyle, StyleRole, Styler};

/// Drawing order; every primitive of a layer is drawn before the next layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Layer {
    BackgroundGroups,
    Wires,
    VerticalLinks,
    Glyphs,
    Slices,
    ForegroundGroups,
    Labels,
}

impl Layer {
    pub const ALL: [Layer; 7] = [
        Layer::BackgroundGroups,
        Layer::Wires,
        Layer::VerticalLinks,
        Layer::Glyphs,
        Layer::Slices,
        Layer::ForegroundGroups,
        Layer::Labels,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Layer::BackgroundGroups => "background-groups",
            Layer::Wires => "wires",
            Layer::VerticalLinks => "vertical-links",
            Layer::Glyphs => "glyphs",
            Layer::Slices => "slices",
            Layer::ForegroundGroups => "foreground-groups",
            Layer::Labels => "labels",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Line,
    /// One of the two lines of a classical wire.
    DoubleLine,
    /// One of the parallel lines of an alternate bundle.
    BundleLine,
    /// The slanted tick on a bundled wire.
    Strike,
    Polyline,
    Rect,
    Circle,
    Arc,
    Path,
    Text,
}

impl Kind {
    pub fn name(self) -> &'static str {
        match self {
            Kind::Line => "line",
            Kind::DoubleLine => "double-line",
            Kind::BundleLine => "bundle-line",
            Kind::Strike => "strike",
            Kind::Polyline => "polyline",
            Kind::Rect => "rect",
            Kind::Circle => "circle",
            Kind::Arc => "arc",
            Kind::Path => "path",
            Kind::Text => "text",
        }
    }
}

pub type Point = (f64, f64);

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Seg {
    Move(Point),
    LineTo(Point),
    Quad(Point, Point),
    Cubic(Point, Point, Point),
    Close,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TextAnchor {
    Start,
    Middle,
    End,
}

impl TextAnchor {
    pub fn name(self) -> &'static str {
        match self {
            TextAnchor::Start => "start",
            TextAnchor::Middle => "middle",
            TextAnchor::End => "end",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Shape {
    Line {
        p1: Point,
        p2: Point,
    },
    Polyline {
        pts: Vec<Point>,
    },
    Rect {
        rect: Rect,
        radius: f64,
    },
    Circle {
        c: Point,
        r: f64,
    },
    /// Angles in degrees, counter-clockwise from the positive x axis.
    Arc {
        c: Point,
        r: f64,
        a0: f64,
        a1: f64,
    },
    Path {
        segs: Vec<Seg>,
    },
    /// One line of text, vertically centred on `pos`.
    Text {
        pos: Point,
        runs: Line,
        anchor: TextAnchor,
        rotate: f64,
    },
}

/// Fully resolved paint attributes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DrawStyle {
    pub stroke: Option<Color>,
    pub fill: Option<Color>,
    pub width: f64,
    pub dashed: bool,
    /// Font size for text, 0 otherwise.
    pub font_size: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Primitive {
    pub layer: Layer,
    pub kind: Kind,
    pub shape: Shape,
    pub style: DrawStyle,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Scene {
    pub primitives: Vec<Primitive>,
    pub baseline: Option<f64>,
}

impl Scene {
    pub fn is_layered(&self) -> bool {
        self.primitives.windows(2).all(|w| w[0].layer <= w[1].layer)
    }

    pub fn count(&self, kind: Kind) -> usize {
        self.primitives.iter().filter(|p| p.kind == kind).count()
    }

    /// Bounding box of everything drawn, including stroke widths and an
    /// estimate of text extents.
    pub fn bbox(&self) -> Option<Rect> {
        let m = TextMetrics::default();
        self.primitives
            .iter()
            .map(|p| {
                let hw = p.style.width / 2.0;
                match &p.shape {
                    Shape::Line { p1, p2 } => points_rect(&[*p1, *p2]).inflate(hw, hw),
                    Shape::Polyline { pts } => points_rect(pts).inflate(hw, hw),
                    Shape::Rect { rect, .. } => rect.inflate(hw, hw),
                    Shape::Circle { c, r } | Shape::Arc { c, r, .. } => {
                        Rect::centered(c.0, c.1, 2.0 * r, 2.0 * r).inflate(hw, hw)
                    }
                    Shape::Path { segs } => {
                        let pts: Vec<Point> = segs
                            .iter()
                            .flat_map(|s| match *s {
                                Seg::Move(a) | Seg::LineTo(a) => vec![a],
                                Seg::Quad(a, b) => vec![a, b],
                                Seg::Cubic(a, b, c) => vec![a, b, c],
                                Seg::Close => vec![],
                            })
                            .collect();
                        points_rect(&pts).inflate(hw, hw)
                    }
                    Shape::Text { pos, runs, anchor, rotate } => {
                        let scale = p.style.font_size / m.font_size;
                        let (w, h) = (m.line_width(runs, scale), m.line_height(scale));
                        let x = match anchor {
                            TextAnchor::Start => pos.0,
                            TextAnchor::Middle => pos.0 - w / 2.0,
                            TextAnchor::End => pos.0 - w,
                        };
                        let r = Rect { x, y: pos.1 - h / 2.0, w, h };
                        if *rotate == 0.0 {
                            r
                        } else {
                            let a = rotate.to_radians();
                            let corners = [(r.x, r.y), (r.right(), r.y), (r.x, r.bottom()), (r.right(), r.bottom())]
                                .map(|(x, y)| {
                                    let (dx, dy) = (x - pos.0, y - pos.1);
                                    (pos.0 + dx * a.cos() - dy * a.sin(), pos.1 + dx * a.sin() + dy * a.cos())
                                });
                            points_rect(&corners)
                        }
                    }
                }
            })
            .reduce(|a, b| a.union(&b))
    }
}

fn points_rect(pts: &[Point]) -> Rect {
    let (mut x0, mut y0, mut x1, mut y1) = (f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
    for &(x, y) in pts {
        x0 = x0.min(x);
        y0 = y0.min(y);
        x1 = x1.max(x);
        y1 = y1.max(y);
    }
    if pts.is_empty() {
        return Rect::default();
    }
    Rect { x: x0, y: y0, w: x1 - x0, h: y1 - y0 }
}

struct Builder<'a> {
    layers: Vec<Vec<Primitive>>,
    styler: &'a Styler<'a>,
    m: TextMetrics,
}

impl Builder<'_> {
    fn draw(&self, ns: &NodeStyle) -> DrawStyle {
        DrawStyle {
            stroke: ns.stroke.color(),
            fill: ns.fill.color(),
            width: ns.line_width.to_units(self.m.font_size),
            dashed: ns.dashed,
            font_size: 0.0,
        }
    }

    fn push(&mut self, layer: Layer, kind: Kind, shape: Shape, style: DrawStyle) {
        self.layers[layer as usize].push(Primitive { layer, kind, shape, style });
    }

    fn line(&mut self, layer: Layer, kind: Kind, p1: Point, p2: Point, ns: &NodeStyle) {
        let mut st = self.draw(ns);
        st.fill = None;
        self.push(layer, kind, Shape::Line { p1, p2 }, st);
    }

    fn path(&mut self, layer: Layer, segs: Vec<Seg>, st: DrawStyle) {
        self.push(layer, Kind::Path, Shape::Path { segs }, st);
    }

    /// Draws a label; lines stack around `pos`, shifted by the style's
    /// `xshift`/`yshift`. `rotate` is clockwise on screen. Returns the label size.
    fn text(&mut self, pos: Point, label: &str, anchor: TextAnchor, rotate: f64, ns: &NodeStyle) -> (f64, f64) {
        let fs = self.m.font_size;
        let pos = (pos.0 + ns.xshift.to_units(fs), pos.1 - ns.yshift.to_units(fs));
        let lines = parse_label(label);
        let scale = ns.font_scale;
        let lh = self.m.line_height(scale);
        let n = lines.len();
        let mut w: f64 = 0.0;
        let st = DrawStyle {
            stroke: None,
            fill: Some(ns.text_color()),
            width: 0.0,
            dashed: false,
            font_size: self.m.font_size * scale,
        };
        let (sin, cos) = rotate.to_radians().sin_cos();
        for (i, runs) in lines.into_iter().enumerate() {
            w = w.max(self.m.line_width(&runs, scale));
            let dy = (i as f64 - (n as f64 - 1.0) / 2.0) * lh;
            let p = (pos.0 - dy * sin, pos.1 + dy * cos);
            self.push(Layer::Labels, Kind::Text, Shape::Text { pos: p, runs, anchor, rotate }, st);
        }
        (w, n as f64 * lh)
    }

    fn style(&self, role: StyleRole, raw: &str) -> NodeStyle {
        self.styler.style(role, raw)
    }
}

/// `ns` with the keys of `raw` applied on top.
fn overlay(ns: &NodeStyle, raw: &str) -> NodeStyle {
    let mut out = ns.clone();
    parse_style(raw).0.apply_to(&mut out);
    out
}

/// A curly brace spanning `top..bottom`. `opens_right` gives `{`, whose
/// tip sits at `x` and whose arms reach `x + width`; otherwise `}` with
/// the tip at `x + width`.
fn brace(x: f64, top: f64, bottom: f64, opens_right: bool) -> Vec<Seg> {
    let w = glyph::BRACE_WIDTH;
    let (tip, arms) = if opens_right { (x, x + w) } else { (x + w, x) };
    let mid = (top + bottom) / 2.0;
    let k = (tip + arms) / 2.0;
    vec![
        Seg::Move((arms, top)),
        Seg::Cubic((k, top), (k, mid), (tip, mid)),
        Seg::Cubic((k, mid), (k, bottom), (arms, bottom)),
    ]
}

fn arrow_head(tip: Point, from: Point) -> Vec<Seg> {
    let (dx, dy) = (tip.0 - from.0, tip.1 - from.1);
    let len = dx.hypot(dy);
    if len == 0.0 {
        return Vec::new();
    }
    let (ux, uy) = (dx / len, dy / len);
    let l = glyph::ARROW_HEAD;
    let base = (tip.0 - ux * l, tip.1 - uy * l);
    let (nx, ny) = (-uy * l / 3.0, ux * l / 3.0);
    vec![Seg::Move(tip), Seg::LineTo((base.0 + nx, base.1 + ny)), Seg::LineTo((base.0 - nx, base.1 - ny)), Seg::Close]
}

/// Builds the scene for a laid-out circuit.
pub fn build_scene(rc: &ResolvedCircuit, lay: &LayoutResult, styler: &Styler) -> Scene {
    let mut b = Builder { layers: vec![Vec::new(); Layer::ALL.len()], styler, m: TextMetrics::default() };
    let Some(grid_rect) = lay.grid_rect() else {
        return Scene::default();
    };
    wires(&mut b, rc, lay);
    for link in &rc.links {
        vertical_link(&mut b, rc, lay, link);
    }
    let grid = &rc.grid;
    for r in 0..grid.rows() {
        for c in 0..grid.cols() {
            let cell = grid.cell(r, c);
            if cell.covered_by.is_some() {
                continue;
            }
            for el in cell.elements() {
                element(&mut b, lay, grid_rect, r, c, el);
            }
        }
    }
    for a in &rc.arrows {
        let ns = b.style(StyleRole::Wire, &a.style);
        let from = (lay.col_x[a.from.1], lay.row_y[a.from.0]);
        let to = (lay.col_x[a.to.1], lay.row_y[a.to.0]);
        b.line(Layer::Glyphs, Kind::Line, from, to, &ns);
        let mut st = b.draw(&ns);
        st.fill = st.stroke;
        b.path(Layer::Glyphs, arrow_head(to, from), st);
    }
    slices(&mut b, rc, lay, grid_rect);
    groups(&mut b, rc, lay);
    Scene { primitives: b.layers.into_iter().flatten().collect(), baseline: lay.baseline_y }
}

fn wires(b: &mut Builder, rc: &ResolvedCircuit, lay: &LayoutResult) {
    let ns = b.style(StyleRole::Wire, "");
    for (&(r, g), kind) in &rc.wire_segments {
        let x1 = lay.extents[&(r, g)].right();
        let x2 = lay.extents[&(r, g + 1)].x;
        if x2 <= x1 {
            continue;
        }
        let y = lay.row_y[r];
        match kind {
            SegmentKind::None => {}
            SegmentKind::Quantum => b.line(Layer::Wires, Kind::Line, (x1, y), (x2, y), &ns),
            SegmentKind::Classical => {
                let turn = bend_at(rc, r, g + 1);
                for d in [-glyph::CLASSICAL_OFFSET, glyph::CLASSICAL_OFFSET] {
                    let end = turn.map_or(x2, |s| x2 + s * d);
                    b.line(Layer::Wires, Kind::DoubleLine, (x1, y + d), (end, y + d), &ns);
                }
            }
            SegmentKind::Bundle(bundle) if bundle.alternate => {
                for d in bundle_offsets(bundle.alt2) {
                    b.line(Layer::Wires, Kind::BundleLine, (x1, y + d), (x2, y + d), &ns);
                }
            }
            SegmentKind::Bundle(bundle) => {
                b.line(Layer::Wires, Kind::Line, (x1, y), (x2, y), &ns);
                let xs = x1 + ((x2 - x1) / 2.0).min(3.0 * glyph::STRIKE_WIDTH);
                let (hw, hh) = (glyph::STRIKE_WIDTH / 2.0, glyph::STRIKE_HEIGHT / 2.0);
                b.line(Layer::Wires, Kind::Strike, (xs - hw, y + hh), (xs + hw, y - hh), &ns);
                if !bundle.count.is_empty() {
                    let label = b.style(StyleRole::Label, "");
                    let label = NodeStyle { font_scale: b.m.script_scale, ..label };
                    let lh = b.m.line_height(label.font_scale);
                    b.text((xs + hw, y - hh - lh / 2.0 + PT), &bundle.count, TextAnchor::Start, 0.0, &label);
                }
            }
        }
    }
}

/// `1.0` when the classical wire turns up at `(r, c)`, `-1.0` when it turns down.
fn bend_at(rc: &ResolvedCircuit, r: usize, c: usize) -> Option<f64> {
    if c >= rc.grid.cols() {
        return None;
    }
    rc.grid.cell(r, c).elements().find_map(|el| match el {
        Element::ClassicalBend { offset } if *offset < 0 => Some(1.0),
        Element::ClassicalBend { offset } if *offset > 0 => Some(-1.0),
        _ => None,
    })
}

fn bundle_offsets(alt2: bool) -> Vec<f64> {
    let s = glyph::BUNDLE_SPACING;
    if alt2 {
        vec![-s / 2.0, s / 2.0]
    } else {
        vec![-s, 0.0, s]
    }
}

/// Box around the wire of row `r` at column `c`, if a box is drawn there.
fn box_at(rc: &ResolvedCircuit, lay: &LayoutResult, r: usize, c: usize) -> Option<Rect> {
    let host = rc.grid.cell(r, c).covered_by.unwrap_or((r, c));
    lay.boxes.get(&host).copied()
}

fn vertical_link(b: &mut Builder, rc: &ResolvedCircuit, lay: &LayoutResult, link: &VerticalLink) {
    let host = link.from_row;
    let link = link.normalized();
    let (t, bot) = (link.top(), link.bottom());
    let x = lay.col_x[link.col];
    let mut y1 = lay.row_y[t];
    let mut y2 = lay.row_y[bot];
    let top_box = box_at(rc, lay, t, link.col);
    let bottom_box = box_at(rc, lay, bot, link.col);
    if top_box.is_some() && top_box == bottom_box {
        return;
    }
    if let Some(bx) = top_box {
        y1 = y1.max(bx.bottom());
    }
    if let Some(bx) = bottom_box {
        y2 = y2.min(bx.y);
    }
    let ns = b.style(StyleRole::Wire, "");
    let layer = Layer::VerticalLinks;
    match link.kind {
        LinkKind::Classical => {
            for d in [-glyph::CLASSICAL_OFFSET, glyph::CLASSICAL_OFFSET] {
                b.line(layer, Kind::DoubleLine, (x + d, y1), (x + d, y2), &ns);
            }
        }
        LinkKind::Bend => {
            // mitre the corner with the incoming horizontal pair
            for d in [-glyph::CLASSICAL_OFFSET, glyph::CLASSICAL_OFFSET] {
                let (a, z) = if host == bot { (y1, y2 + d) } else { (y1 - d, y2) };
                b.line(layer, Kind::DoubleLine, (x + d, a), (x + d, z), &ns);
            }
        }
        LinkKind::Quantum if link.bundle => {
            for d in bundle_offsets(link.bundle_wires == Some(2)) {
                b.line(layer, Kind::BundleLine, (x + d, y1), (x + d, y2), &ns);
            }
        }
        LinkKind::Quantum => b.line(layer, Kind::Line, (x, y1), (x, y2), &ns),
    }
}

fn slices(b: &mut Builder, rc: &ResolvedCircuit, lay: &LayoutResult, grid_rect: Rect) {
    let vertical = rc.env.vertical_slice_labels;
    for (s, &x) in rc.slices.iter().zip(&lay.slice_x) {
        let ns = b.style(StyleRole::Slice, &s.style);
        let (top, bottom) = (grid_rect.y, grid_rect.bottom());
        b.line(Layer::Slices, Kind::Line, (x, top), (x, bottom), &ns);
        let label = overlay(&b.style(StyleRole::Label, ""), &s.label_style);
        let lh = b.m.line_height(label.font_scale);
        let at = (x, top - glyph::LABEL_GAP);
        if vertical {
            b.text(at, &s.title, TextAnchor::Start, -90.0, &label);
        } else if label.anchor == Anchor::Center && label.rotate_deg == 0.0 {
            b.text((at.0, at.1 - lh / 2.0), &s.title, TextAnchor::Middle, 0.0, &label);
        } else {
            let (anchor, dy) = anchored(label.anchor, lh);
            let rot = -label.rotate_deg;
            let (sin, cos) = rot.to_radians().sin_cos();
            b.text((at.0 - dy * sin, at.1 + dy * cos), &s.title, anchor, rot, &label);
        }
    }
}

/// Text anchor and vertical offset of the line centre for a node anchor.
fn anchored(anchor: Anchor, lh: f64) -> (TextAnchor, f64) {
    use Anchor::*;
    let h = match anchor {
        West | NorthWest | SouthWest => TextAnchor::Start,
        East | NorthEast | SouthEast => TextAnchor::End,
        _ => TextAnchor::Middle,
    };
    let dy = match anchor {
        South | SouthWest | SouthEast => -lh / 2.0,
        North | NorthWest | NorthEast => lh / 2.0,
        _ => 0.0,
    };
    (h, dy)
}

fn groups(b: &mut Builder, rc: &ResolvedCircuit, lay: &LayoutResult) {
    for (g, rect) in rc.groups.iter().zip(&lay.group_rects) {
        let ns = b.style(StyleRole::Group, &g.group.style);
        let layer = if g.group.background { Layer::BackgroundGroups } else { Layer::ForegroundGroups };
        let radius = if ns.rounded { 4.0 * PT } else { 0.0 };
        let st = b.draw(&ns);
        b.push(layer, Kind::Rect, Shape::Rect { rect: *rect, radius }, st);
        if !g.group.label.is_empty() {
            let label = b.styler.style_with(StyleRole::GroupLabel, "gg label", &g.group.label_style);
            let lh = b.m.line_height(label.font_scale);
            let pos = (rect.x, rect.y - glyph::LABEL_GAP - lh / 2.0);
            b.text(pos, &g.group.label, TextAnchor::Start, 0.0, &label);
        }
    }
}

fn dot(b: &mut Builder, c: Point, open: bool, raw: &str) -> f64 {
    let role = if open { StyleRole::OPhase } else { StyleRole::Phase };
    let ns = b.style(role, raw);
    let st = b.draw(&ns);
    b.push(Layer::Glyphs, Kind::Circle, Shape::Circle { c, r: glyph::DOT_RADIUS }, st);
    glyph::DOT_RADIUS
}

fn element(b: &mut Builder, lay: &LayoutResult, grid_rect: Rect, r: usize, c: usize, el: &Element) {
    let (x, y) = (lay.col_x[c], lay.row_y[r]);
    let ext = lay.extents[&(r, c)];
    let gap = glyph::LABEL_GAP;
    match el {
        Element::Gate { label, wires, swap_variant, style, label_style, inputs, outputs, .. } => {
            let ns = b.style(StyleRole::Operator, style);
            let bx = lay.boxes[&(r, c)];
            let st = b.draw(&ns);
            let radius = if ns.rounded { 4.0 * PT } else { 0.0 };
            b.push(Layer::Glyphs, Kind::Rect, Shape::Rect { rect: bx, radius }, st);
            if *swap_variant && *wires > 1 {
                let (ya, yb) = (lay.row_y[r], lay.row_y[r + wires - 1]);
                let wire = b.style(StyleRole::Wire, "");
                b.line(Layer::Glyphs, Kind::Line, (bx.x, ya), (bx.right(), yb), &wire);
                b.line(Layer::Glyphs, Kind::Line, (bx.x, yb), (bx.right(), ya), &wire);
            }
            let label_ns = overlay(&ns, label_style);
            b.text((bx.cx(), bx.cy()), label, TextAnchor::Middle, -label_ns.rotate_deg, &label_ns);
            for p in inputs {
                port(b, lay, r, bx, p, true);
            }
            for p in outputs {
                port(b, lay, r, bx, p, false);
            }
        }
        Element::Stick { side, label, wires, brackets, label_style, brace_style } => {
            let ns = b.style(StyleRole::Label, label_style);
            let last = (r + wires - 1).min(lay.row_y.len() - 1);
            let cy = (lay.row_y[r] + lay.row_y[last]) / 2.0;
            let pad = if *side == StickSide::Mid { 0.0 } else { ns.inner_xsep.to_units(b.m.font_size) };
            let multi = *wires > 1;
            let left = multi && matches!(brackets, crate::model::Brackets::Left | crate::model::Brackets::Both);
            let right = multi && matches!(brackets, crate::model::Brackets::Right | crate::model::Brackets::Both);
            let (top, bottom) = span_edges(lay, r, last);
            let mut cursor = ext.x + pad;
            if left {
                let st = b.draw(&b.style(StyleRole::Dd, brace_style));
                b.path(Layer::Glyphs, brace(cursor, top, bottom, false), st);
                cursor += glyph::BRACE_WIDTH + gap;
            }
            let (tw, _) = b.m.ink_size(label, ns.font_scale);
            b.text((cursor, cy), label, TextAnchor::Start, 0.0, &ns);
            cursor += tw;
            if right {
                let st = b.draw(&b.style(StyleRole::Dm, brace_style));
                b.path(Layer::Glyphs, brace(cursor + gap, top, bottom, true), st);
            }
        }
        Element::PhaseDot { phase_label, open, style, label_position } => {
            let rad = dot(b, (x, y), *open, style);
            if !phase_label.is_empty() {
                let mut ns = b.style(StyleRole::PhaseLabel, "");
                ns.label_position = match label_position.as_str() {
                    "above" => LabelPosition::Above,
                    "below" => LabelPosition::Below,
                    "left" => LabelPosition::Left,
                    "right" => LabelPosition::Right,
                    _ => ns.label_position,
                };
                let lh = b.m.line_height(ns.font_scale);
                let (pos, anchor) = match ns.label_position {
                    LabelPosition::Above => ((x, y - rad - gap - lh / 2.0), TextAnchor::Middle),
                    LabelPosition::Below => ((x, y + rad + gap + lh / 2.0), TextAnchor::Middle),
                    LabelPosition::Left => ((x - rad - gap, y - rad - lh / 2.0), TextAnchor::End),
                    LabelPosition::Right | LabelPosition::Default => {
                        ((x + rad + gap, y - rad - lh / 2.0), TextAnchor::Start)
                    }
                };
                b.text(pos, phase_label, anchor, 0.0, &ns);
            }
        }
        Element::CtrlLine { open, .. } => {
            dot(b, (x, y), *open, "");
        }
        Element::TargCircle { style } => {
            let ns = b.style(StyleRole::CircleWc, style);
            let rad = glyph::TARG_RADIUS;
            let st = b.draw(&ns);
            b.push(Layer::Glyphs, Kind::Circle, Shape::Circle { c: (x, y), r: rad }, st);
            b.line(Layer::Glyphs, Kind::Line, (x - rad, y), (x + rad, y), &ns);
            b.line(Layer::Glyphs, Kind::Line, (x, y - rad), (x, y + rad), &ns);
        }
        Element::SwapCross { style, .. } => {
            let ns = b.style(StyleRole::CrossX2, style);
            let h = glyph::CROSS_HALF;
            b.line(Layer::Glyphs, Kind::Line, (x - h, y - h), (x + h, y + h), &ns);
            b.line(Layer::Glyphs, Kind::Line, (x - h, y + h), (x + h, y - h), &ns);
        }
        Element::Meter { variant, basis_label, style } => {
            let ns = b.style(StyleRole::Meter, style);
            meter(b, lay.boxes[&(r, c)], *variant, basis_label, &ns);
        }
        Element::Trash { label, style } => {
            let ns = b.style(StyleRole::Label, style);
            let x0 = ext.x;
            let x1 = x0 + glyph::TRASH_ARROW;
            b.line(Layer::Glyphs, Kind::Line, (x0, y), (x1, y), &ns);
            let mut st = b.draw(&ns);
            st.fill = st.stroke;
            b.path(Layer::Glyphs, arrow_head((x1, y), (x0, y)), st);
            b.text((x1 + gap, y), label, TextAnchor::Start, 0.0, &ns);
        }
        Element::Push { content } => {
            let ns = b.style(StyleRole::Label, "");
            b.text((x, y), content, TextAnchor::Middle, 0.0, &ns);
        }
        Element::Wave { style } => {
            let ns = b.style(StyleRole::Wave, style);
            let st = b.draw(&ns);
            b.path(Layer::Glyphs, wave(grid_rect.x, grid_rect.right(), y), st);
        }
        Element::Ebit { angle_deg, label, label_style } => {
            let below = lay.row_y.get(r + 1).copied().unwrap_or(y + lay.u_height);
            let p = (below - y) / 2.0;
            let apex = (x + p * angle_deg.to_radians().tan(), y + p);
            let wire = b.style(StyleRole::Wire, "");
            b.line(Layer::Glyphs, Kind::Line, apex, (x, y), &wire);
            b.line(Layer::Glyphs, Kind::Line, apex, (x, below), &wire);
            let ns = b.style(StyleRole::Label, label_style);
            let (pos, anchor) = if *angle_deg < 0.0 {
                ((apex.0 - gap, apex.1), TextAnchor::End)
            } else {
                ((apex.0 + gap, apex.1), TextAnchor::Start)
            };
            b.text(pos, label, anchor, 0.0, &ns);
        }
        Element::Phantom { .. }
        | Element::WireStub { .. }
        | Element::VerticalWire { .. }
        | Element::ClassicalBend { .. }
        | Element::ArrowMark { .. }
        | Element::Empty => {}
    }
}

/// Top and bottom of the band covering rows `first..=last`.
fn span_edges(lay: &LayoutResult, first: usize, last: usize) -> (f64, f64) {
    let half = |i: usize| lay.row_h[i].max(lay.u_height) / 2.0;
    (lay.row_y[first] - half(first) + 2.0 * PT, lay.row_y[last] + half(last) - 2.0 * PT)
}

fn port(b: &mut Builder, lay: &LayoutResult, r: usize, bx: Rect, p: &PortLabel, input: bool) {
    let role = if input { StyleRole::LeftInternal } else { StyleRole::RightInternal };
    let ns = b.style(role, &p.label_style);
    let first = r + p.row_offset;
    let last = (first + p.wires.max(1) - 1).min(lay.row_y.len() - 1);
    let cy = (lay.row_y[first] + lay.row_y[last]) / 2.0;
    let xsep = ns.inner_xsep.to_units(b.m.font_size);
    let multi = p.wires > 1;
    let (top, bottom) = {
        let h = lay.u_height / 2.0 - 2.0 * PT;
        (lay.row_y[first] - h, lay.row_y[last] + h)
    };
    let brace_w = if multi { glyph::BRACE_WIDTH + glyph::LABEL_GAP } else { 0.0 };
    if input {
        if multi {
            let st = b.draw(&b.style(StyleRole::Dd, &p.brace_style));
            b.path(Layer::Glyphs, brace(bx.x + xsep, top, bottom, false), st);
        }
        b.text((bx.x + xsep + brace_w, cy), &p.label, TextAnchor::Start, 0.0, &ns);
    } else {
        if multi {
            let st = b.draw(&b.style(StyleRole::Dm, &p.brace_style));
            b.path(Layer::Glyphs, brace(bx.right() - xsep - glyph::BRACE_WIDTH, top, bottom, true), st);
        }
        b.text((bx.right() - xsep - brace_w, cy), &p.label, TextAnchor::End, 0.0, &ns);
    }
}

fn meter(b: &mut Builder, bx: Rect, variant: MeterVariant, label: &str, ns: &NodeStyle) {
    let st = b.draw(ns);
    let h = bx.h;
    let (top, bottom) = (bx.y, bx.bottom());
    match variant {
        MeterVariant::Box => {
            b.push(Layer::Glyphs, Kind::Rect, Shape::Rect { rect: bx, radius: 0.0 }, st);
            let c = (bx.cx(), bottom - 0.2 * h);
            let half = glyph::METER_SWEEP_DEG / 2.0;
            let mut arc = st;
            arc.fill = None;
            b.push(Layer::Glyphs, Kind::Arc, Shape::Arc { c, r: 0.45 * h, a0: 90.0 - half, a1: 90.0 + half }, arc);
            let a = glyph::NEEDLE_DEG.to_radians();
            let len = 0.65 * h;
            b.line(Layer::Glyphs, Kind::Line, c, (c.0 + len * a.cos(), c.1 - len * a.sin()), ns);
            if !label.is_empty() {
                let ls = b.style(StyleRole::MyLabel, "");
                let lh = b.m.line_height(ls.font_scale);
                b.text((bx.cx(), top - glyph::LABEL_GAP - lh / 2.0), label, TextAnchor::Middle, 0.0, &ls);
            }
        }
        MeterVariant::D => {
            let x0 = bx.x;
            let flat = x0 + 0.2 * h;
            let k = flat + glyph::D_DEPTH * h * 4.0 / 3.0;
            let segs = vec![
                Seg::Move((x0, top)),
                Seg::LineTo((flat, top)),
                Seg::Cubic((k, top), (k, bottom), (flat, bottom)),
                Seg::LineTo((x0, bottom)),
                Seg::Close,
            ];
            b.path(Layer::Glyphs, segs, st);
            b.text((x0 + 0.4 * h, bx.cy()), label, TextAnchor::Middle, 0.0, ns);
        }
        MeterVariant::Tab => {
            let (x0, x1) = (bx.x, bx.right());
            let point = x1 - glyph::TAB_POINT * h;
            let segs = vec![
                Seg::Move((x0, top)),
                Seg::LineTo((point, top)),
                Seg::LineTo((x1, bx.cy())),
                Seg::LineTo((point, bottom)),
                Seg::LineTo((x0, bottom)),
                Seg::Close,
            ];
            b.path(Layer::Glyphs, segs, st);
            b.text(((x0 + point) / 2.0, bx.cy()), label, TextAnchor::Middle, 0.0, ns);
        }
        MeterVariant::Rounded => {
            b.push(Layer::Glyphs, Kind::Rect, Shape::Rect { rect: bx, radius: h / 2.0 }, st);
            b.text((bx.cx(), bx.cy()), label, TextAnchor::Middle, 0.0, ns);
        }
    }
}

/// Sine wave from `x0` to `x1` as quadratic half periods.
fn wave(x0: f64, x1: f64, y: f64) -> Vec<Seg> {
    let half = glyph::WAVE_LENGTH / 2.0;
    let amp = glyph::WAVE_AMPLITUDE;
    let mut segs = vec![Seg::Move((x0, y))];
    let mut x = x0;
    let mut up = true;
    while x < x1 - 1e-9 {
        let next = (x + half).min(x1);
        let peak = if up { y - 2.0 * amp } else { y + 2.0 * amp };
        segs.push(Seg::Quad(((x + next) / 2.0, peak), (next, y)));
        x = next;
        up = !up;
    }
    segs
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::layout::{layout, GeometryConfig};
    use crate::model::{lower, resolve};
    use crate::style::StyleSheet;
    use crate::syntax::parse_document;

    pub(crate) fn scene_of(src: &str) -> Scene {
        let (grid, env, _) = lower(&parse_document(src).unwrap()).unwrap();
        let rc = resolve(grid, env).unwrap();
        let sheet = StyleSheet::default();
        let styler = Styler { sheet: &sheet, env: &rc.env };
        let lay = layout(&rc, &styler, &GeometryConfig::from_env(&rc.env)).unwrap();
        build_scene(&rc, &lay, &styler)
    }

    fn lines(scene: &Scene, kind: Kind, layer: Layer) -> Vec<(Point, Point)> {
        scene
            .primitives
            .iter()
            .filter(|p| p.kind == kind && p.layer == layer)
            .filter_map(|p| match p.shape {
                Shape::Line { p1, p2 } => Some((p1, p2)),
                _ => None,
            })
            .collect()
    }

    #[test]
    fn one_quantum_segment_is_one_line() {
        let s = scene_of(r"\qw & \qw");
        assert_eq!(lines(&s, Kind::Line, Layer::Wires).len(), 1);
        assert!(s.is_layered());
    }

    #[test]
    fn classical_segment_is_two_offset_lines() {
        let s = scene_of(r"\cw & \cw");
        let ls = lines(&s, Kind::DoubleLine, Layer::Wires);
        assert_eq!(ls.len(), 2);
        let ys: Vec<f64> = ls.iter().map(|l| l.0 .1).collect();
        // 0.05cm either side of the row centre at y = 0
        assert!((ys[0] + 5.0).abs() < 1e-12 && (ys[1] - 5.0).abs() < 1e-12);
    }

    #[test]
    fn bundle_has_strike_and_count() {
        let s = scene_of(r"\qw & \qwbundle{3}");
        assert_eq!(s.count(Kind::Strike), 1);
        assert!(s.primitives.iter().any(|p| matches!(&p.shape, Shape::Text { runs, .. } if runs[0].text == "3")));
    }

    #[test]
    fn ebit_vee_at_sixty_degrees() {
        let s = scene_of(r"\makeebit[-60][blue]{test} & \qw \\ & \qw");
        let ls = lines(&s, Kind::Line, Layer::Glyphs);
        assert_eq!(ls.len(), 2);
        assert_eq!(ls[0].0, ls[1].0);
        for (apex, end) in ls {
            let ang = ((end.0 - apex.0).abs() / (end.1 - apex.1).abs()).atan().to_degrees();
            assert!((ang - 60.0).abs() < 1e-9, "{ang}");
        }
        let blue = Color::rgb(0.0, 0.0, 1.0);
        assert!(s
            .primitives
            .iter()
            .any(|p| matches!(&p.shape, Shape::Text { runs, .. } if runs[0].text == "test")
                && p.style.fill == Some(blue)));
    }

    #[test]
    fn background_group_precedes_wires() {
        let s = scene_of(r"\gate{H}\gategroup[1,steps=2,background]{g} & \gate{X} & \qw");
        let group = s.primitives.iter().position(|p| p.kind == Kind::Rect && p.layer == Layer::BackgroundGroups);
        let wire = s.primitives.iter().position(|p| p.layer == Layer::Wires);
        assert!(group.unwrap() < wire.unwrap());
        let fg = scene_of(r"\gate{H}\gategroup[1,steps=2]{g} & \gate{X} & \qw");
        assert!(fg.primitives.iter().any(|p| p.kind == Kind::Rect && p.layer == Layer::ForegroundGroups));
    }

    #[test]
    fn cnot_glyphs() {
        let s = scene_of(r"\ctrl{1} & \qw \\ \targ{} & \qw");
        assert_eq!(s.count(Kind::Circle), 2);
        assert_eq!(lines(&s, Kind::Line, Layer::VerticalLinks).len(), 1);
    }

    #[test]
    fn link_stops_at_gate_box() {
        let s = scene_of(r"\ctrl{1} & \qw \\ \gate{U} & \qw");
        let (p1, p2) = lines(&s, Kind::Line, Layer::VerticalLinks)[0];
        let gate = s.primitives.iter().find_map(|p| match p.shape {
            Shape::Rect { rect, .. } => Some(rect),
            _ => None,
        });
        assert_eq!(p1.1, 0.0);
        assert_eq!(p2.1, gate.unwrap().y);
    }

    #[test]
    fn wave_spans_full_width() {
        let s = scene_of(r"\gate{A} & \wave & \gate{B}");
        let segs = s.primitives.iter().find_map(|p| match &p.shape {
            Shape::Path { segs } => Some(segs.clone()),
            _ => None,
        });
        let segs = segs.unwrap();
        let bb = s.bbox().unwrap();
        assert!(matches!(segs[0], Seg::Move((x, _)) if (x - bb.x).abs() < 2.0));
    }

    #[test]
    fn rotated_slice_title_sits_above_the_grid() {
        let s = scene_of(
            r"\begin{quantikz}[slice all,slice label style={anchor=south west,rotate=40}] \gate{H} & \qw \end{quantikz}",
        );
        let title = s.primitives.iter().find(|p| matches!(&p.shape, Shape::Text { runs, .. } if runs[0].text == "1"));
        let title = title.unwrap().clone();
        let Shape::Text { anchor, rotate, .. } = title.shape else { unreachable!() };
        assert_eq!((anchor, rotate), (TextAnchor::Start, -40.0));
        let slice = lines(&s, Kind::Line, Layer::Slices)[0];
        let bb = Scene { primitives: vec![title], baseline: None }.bbox().unwrap();
        // the south west corner is the lowest point and sits on the anchor
        assert!((bb.bottom() - (slice.0 .1 - glyph::LABEL_GAP)).abs() < 1e-9);
    }

    #[test]
    fn bend_corner_is_mitred() {
        let s = scene_of(r"\qw & \gate{U} & \qw \\ \meter{} & \cwbend{-1} & \qw");
        let horizontal = lines(&s, Kind::DoubleLine, Layer::Wires);
        let vertical = lines(&s, Kind::DoubleLine, Layer::VerticalLinks);
        assert_eq!((horizontal.len(), vertical.len()), (2, 2));
        let ends: Vec<Point> = horizontal.iter().map(|l| l.1).collect();
        let bottoms: Vec<Point> = vertical.iter().map(|l| if l.0 .1 > l.1 .1 { l.0 } else { l.1 }).collect();
        for e in &ends {
            assert!(bottoms.contains(e), "{e:?} not in {bottoms:?}");
        }
        // outer corner below and right of the inner one
        assert!(ends[1].0 > ends[0].0 && ends[1].1 > ends[0].1);
    }

    #[test]
    fn shifts_move_labels() {
        let plain = scene_of(r"\gate[label style={}]{H}");
        let moved = scene_of(r"\gate[label style={xshift=1cm,yshift=1cm}]{H}");
        let pos = |s: &Scene| {
            s.primitives.iter().find_map(|p| match p.shape {
                Shape::Text { pos, .. } => Some(pos),
                _ => None,
            })
        };
        let (a, b) = (pos(&plain).unwrap(), pos(&moved).unwrap());
        assert!((b.0 - a.0 - 100.0).abs() < 1e-9 && (b.1 - a.1 + 100.0).abs() < 1e-9);
    }

    #[test]
    fn empty_grid_is_empty_scene() {
        assert_eq!(scene_of(""), Scene::default());
    }
}
