//! Absolute geometry: column and row centres, element boxes, slice and group
//! positions and the baseline. All coordinates are internal units
//! (1cm = 100u), y growing downwards.

use std::collections::BTreeMap;

use crate::label::{parse_label, Line, Script};
use crate::model::{Element, EnvOptions, MeterVariant, PhantomKind, ResolvedCircuit, StickSide};
use crate::style::{NodeStyle, StyleRole, Styler};
use crate::syntax::{Length, PT_PER_CM, UNITS_PER_CM};

/// One point in internal units.
pub const PT: f64 = UNITS_PER_CM / PT_PER_CM;

/// Fixed glyph proportions.
pub mod glyph {
    use super::PT;

    pub const DOT_RADIUS: f64 = 2.2 * PT;
    pub const TARG_RADIUS: f64 = 5.0 * PT;
    pub const CROSS_HALF: f64 = 4.5 * PT;
    pub const STRIKE_HEIGHT: f64 = 20.0;
    pub const STRIKE_WIDTH: f64 = 15.0;
    /// Half the distance between the two lines of a classical wire.
    pub const CLASSICAL_OFFSET: f64 = 5.0;
    /// Distance between the lines of an alternate bundle.
    pub const BUNDLE_SPACING: f64 = 8.0;
    pub const BRACE_WIDTH: f64 = 5.0 * PT;
    pub const PORT_BRACE_WIDTH: f64 = 3.0 * PT;
    pub const ARROW_HEAD: f64 = 4.0 * PT;
    pub const TRASH_ARROW: f64 = 10.0 * PT;
    pub const LABEL_GAP: f64 = 2.0 * PT;
    pub const METER_SWEEP_DEG: f64 = 140.0;
    pub const NEEDLE_DEG: f64 = 65.0;
    /// Width of the `\meter` box relative to its height.
    pub const METER_ASPECT: f64 = 1.25;
    /// Depth of the curved side of `\meterD` relative to its height.
    pub const D_DEPTH: f64 = 0.6;
    pub const TAB_POINT: f64 = 0.25;
    pub const WAVE_AMPLITUDE: f64 = 3.0 * PT;
    pub const WAVE_LENGTH: f64 = 30.0;
}

/// Deterministic text size estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TextMetrics {
    /// Font size in internal units.
    pub font_size: f64,
    /// Advance per character, as a fraction of the font size.
    pub advance: f64,
    pub line_height: f64,
    pub script_scale: f64,
}

impl Default for TextMetrics {
    fn default() -> Self {
        TextMetrics { font_size: 10.0 * PT, advance: 0.52, line_height: 1.2, script_scale: 0.7 }
    }
}

impl TextMetrics {
    pub fn text_width(&self, s: &str, scale: f64) -> f64 {
        s.chars().count() as f64 * self.advance * self.font_size * scale
    }

    pub fn line_width(&self, line: &Line, scale: f64) -> f64 {
        line.iter()
            .map(|r| {
                let k = if r.script == Script::Normal { 1.0 } else { self.script_scale };
                self.text_width(&r.text, scale * k)
            })
            .sum()
    }

    pub fn line_height(&self, scale: f64) -> f64 {
        self.line_height * self.font_size * scale
    }

    /// Width and height of a label; an empty label still has one line of height.
    pub fn label_size(&self, label: &str, scale: f64) -> (f64, f64) {
        let lines = parse_label(label);
        let w = lines.iter().map(|l| self.line_width(l, scale)).fold(0.0, f64::max);
        (w, lines.len().max(1) as f64 * self.line_height(scale))
    }

    /// Like [`label_size`](Self::label_size) but zero for an empty label.
    pub fn ink_size(&self, label: &str, scale: f64) -> (f64, f64) {
        let lines = parse_label(label);
        if lines.is_empty() {
            return (0.0, 0.0);
        }
        self.label_size(label, scale)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeometryConfig {
    pub column_sep: Length,
    pub row_sep: Length,
    pub between_origins: bool,
    pub metrics: TextMetrics,
}

impl GeometryConfig {
    pub fn from_env(env: &EnvOptions) -> Self {
        GeometryConfig {
            column_sep: env.column_sep,
            row_sep: env.row_sep,
            between_origins: env.between_origins,
            metrics: TextMetrics::default(),
        }
    }

    pub fn units(&self, l: Length) -> f64 {
        l.to_units(self.metrics.font_size)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Rect {
    pub x: f64,
    pub y: f64,
    pub w: f64,
    pub h: f64,
}

impl Rect {
    pub fn centered(cx: f64, cy: f64, w: f64, h: f64) -> Rect {
        Rect { x: cx - w / 2.0, y: cy - h / 2.0, w, h }
    }

    pub fn right(&self) -> f64 {
        self.x + self.w
    }

    pub fn bottom(&self) -> f64 {
        self.y + self.h
    }

    pub fn cx(&self) -> f64 {
        self.x + self.w / 2.0
    }

    pub fn cy(&self) -> f64 {
        self.y + self.h / 2.0
    }

    pub fn inflate(&self, dx: f64, dy: f64) -> Rect {
        Rect { x: self.x - dx, y: self.y - dy, w: self.w + 2.0 * dx, h: self.h + 2.0 * dy }
    }

    pub fn union(&self, o: &Rect) -> Rect {
        let (x, y) = (self.x.min(o.x), self.y.min(o.y));
        Rect { x, y, w: self.right().max(o.right()) - x, h: self.bottom().max(o.bottom()) - y }
    }

    /// True when the interiors overlap; touching edges do not count.
    pub fn overlaps(&self, o: &Rect) -> bool {
        self.x < o.right() && o.x < self.right() && self.y < o.bottom() && o.y < self.bottom()
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LayoutDiagnostic {
    /// Rows `i` and `i + 1` are closer than their contents need.
    #[error("rows {} and {} overlap: the row pitch is smaller than their contents", .0 + 1, .0 + 2)]
    RowPitchTooSmall(usize),
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LayoutError {
    #[error("align equals at={value} is outside rows 1..={rows}")]
    OutOfRangeAlign { value: f64, rows: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct LayoutResult {
    pub col_x: Vec<f64>,
    pub col_w: Vec<f64>,
    pub row_y: Vec<f64>,
    pub row_h: Vec<f64>,
    /// Boxes of gates and meters, keyed by host cell.
    pub boxes: BTreeMap<(usize, usize), Rect>,
    /// Visible extent of every cell's primary glyph; wires stop at its edges.
    /// Cells covered by a gate get the gate's box.
    pub extents: BTreeMap<(usize, usize), Rect>,
    pub baseline_y: Option<f64>,
    /// One entry per slice of the resolved circuit.
    pub slice_x: Vec<f64>,
    /// One entry per gate group of the resolved circuit.
    pub group_rects: Vec<Rect>,
    /// Height of a gate labelled "U".
    pub u_height: f64,
    pub diagnostics: Vec<LayoutDiagnostic>,
}

impl LayoutResult {
    /// Bounding box of the grid cells.
    pub fn grid_rect(&self) -> Option<Rect> {
        let (first, last) = (self.row_y.first()?, self.row_y.len() - 1);
        let top = first - self.row_h[0] / 2.0;
        let bottom = self.row_y[last] + self.row_h[last] / 2.0;
        let left = self.col_x.first()? - self.col_w[0] / 2.0;
        let c = self.col_x.len() - 1;
        let right = self.col_x[c] + self.col_w[c] / 2.0;
        Some(Rect { x: left, y: top, w: right - left, h: bottom - top })
    }
}

/// Style role of an element and its per-element style keys.
pub fn role_of(el: &Element) -> (StyleRole, &str) {
    match el {
        Element::Gate { style, .. } => (StyleRole::Operator, style),
        Element::Meter { style, .. } => (StyleRole::Meter, style),
        Element::PhaseDot { open: false, style, .. } => (StyleRole::Phase, style),
        Element::PhaseDot { open: true, style, .. } => (StyleRole::OPhase, style),
        Element::CtrlLine { open: false, .. } => (StyleRole::Phase, ""),
        Element::CtrlLine { open: true, .. } => (StyleRole::OPhase, ""),
        Element::TargCircle { style } => (StyleRole::CircleWc, style),
        Element::SwapCross { style, .. } => (StyleRole::CrossX2, style),
        Element::Wave { style } => (StyleRole::Wave, style),
        Element::Phantom { .. } => (StyleRole::Operator, ""),
        Element::Stick { label_style, .. } => (StyleRole::Label, label_style),
        Element::Trash { style, .. } => (StyleRole::Label, style),
        Element::Ebit { label_style, .. } => (StyleRole::Label, label_style),
        Element::ArrowMark { style, .. } => (StyleRole::Wire, style),
        _ => (StyleRole::Label, ""),
    }
}

fn sep_units(style: &NodeStyle, fs: f64) -> (f64, f64) {
    (style.inner_xsep.to_units(fs), style.inner_ysep.to_units(fs))
}

/// Width and height an element claims in its cell.
///
/// Sticks report zero height: their labels never push rows apart. A
/// multi-wire gate reports the height of its whole box.
pub fn measure(el: &Element, style: &NodeStyle, m: &TextMetrics) -> (f64, f64) {
    let fs = m.font_size;
    let (xsep, ysep) = sep_units(style, fs);
    let scale = style.font_scale;
    match el {
        Element::Gate { label, min_width, .. } => {
            let (tw, th) = m.label_size(label, scale);
            let w = (tw + 2.0 * xsep).max(min_width.map_or(0.0, |l| l.to_units(fs)));
            (w, th + 2.0 * ysep)
        }
        Element::Stick { label, wires, brackets, side, .. } => {
            let (tw, _) = m.ink_size(label, scale);
            let braces = if *wires > 1 { brackets.count() } else { 0 };
            let pad = if *side == StickSide::Mid { 0.0 } else { xsep };
            (tw + 2.0 * pad + braces as f64 * (glyph::BRACE_WIDTH + glyph::LABEL_GAP), 0.0)
        }
        Element::PhaseDot { .. } | Element::CtrlLine { .. } => (2.0 * glyph::DOT_RADIUS, 2.0 * glyph::DOT_RADIUS),
        Element::TargCircle { .. } => (2.0 * glyph::TARG_RADIUS, 2.0 * glyph::TARG_RADIUS),
        Element::SwapCross { .. } => (2.0 * glyph::CROSS_HALF, 2.0 * glyph::CROSS_HALF),
        Element::Meter { variant, basis_label, .. } => {
            let h = m.line_height(1.0) + 2.0 * ysep;
            let w = match variant {
                MeterVariant::Box => glyph::METER_ASPECT * h,
                MeterVariant::D => (0.2 + glyph::D_DEPTH) * h,
                MeterVariant::Tab => {
                    (m.ink_size(basis_label, scale).0 + 2.0 * xsep + glyph::TAB_POINT * h).max(0.8 * h)
                }
                MeterVariant::Rounded => (m.ink_size(basis_label, scale).0 + 2.0 * xsep + h / 2.0).max(h),
            };
            (w, h)
        }
        Element::Trash { label, .. } => {
            let (tw, th) = m.ink_size(label, scale);
            (glyph::TRASH_ARROW + glyph::LABEL_GAP + tw, th)
        }
        Element::Push { content } => m.ink_size(content, scale),
        Element::Phantom { kind, content } => {
            let (tw, th) = m.label_size(content, scale);
            match kind {
                PhantomKind::BoxWidener => (tw + 2.0 * xsep, 0.0),
                PhantomKind::WireLengthener => (tw, 0.0),
                PhantomKind::Ghost => (0.0, th + 2.0 * ysep),
            }
        }
        Element::WireStub { .. }
        | Element::VerticalWire { .. }
        | Element::ClassicalBend { .. }
        | Element::Wave { .. }
        | Element::Ebit { .. }
        | Element::ArrowMark { .. }
        | Element::Empty => (0.0, 0.0),
    }
}

impl crate::model::Brackets {
    /// Number of braces drawn.
    pub fn count(self) -> usize {
        use crate::model::Brackets::*;
        match self {
            None => 0,
            Left | Right => 1,
            Both => 2,
        }
    }
}

/// Column centres: `col_x[i+1] = col_x[i] + w[i]/2 + sep + extra(i) + w[i+1]/2`.
pub fn place_columns(widths: &[f64], sep: f64, extra: &BTreeMap<usize, f64>) -> Vec<f64> {
    let mut xs: Vec<f64> = Vec::with_capacity(widths.len());
    for (i, &w) in widths.iter().enumerate() {
        let x = match i {
            0 => w / 2.0,
            _ => xs[i - 1] + widths[i - 1] / 2.0 + sep + extra.get(&(i - 1)).copied().unwrap_or(0.0) + w / 2.0,
        };
        xs.push(x);
    }
    xs
}

/// Row centres. In gap mode `sep` separates row edges; between origins it is
/// the exact pitch, and rows whose contents then overlap are reported.
pub fn place_rows(
    heights: &[f64],
    sep: f64,
    extra: &BTreeMap<usize, f64>,
    between_origins: bool,
) -> (Vec<f64>, Vec<LayoutDiagnostic>) {
    let mut ys: Vec<f64> = Vec::with_capacity(heights.len());
    let mut diags = Vec::new();
    for (i, &h) in heights.iter().enumerate() {
        if i == 0 {
            ys.push(0.0);
            continue;
        }
        let add = extra.get(&(i - 1)).copied().unwrap_or(0.0);
        let need = heights[i - 1] / 2.0 + h / 2.0;
        let step = if between_origins {
            if sep + add < need {
                diags.push(LayoutDiagnostic::RowPitchTooSmall(i - 1));
            }
            sep + add
        } else {
            need + sep + add
        };
        ys.push(ys[i - 1] + step);
    }
    (ys, diags)
}

/// Vertical alignment point. `align` counts rows from 1; fractions
/// interpolate between neighbouring rows. Without it, the middle of the grid.
pub fn baseline(row_y: &[f64], row_h: &[f64], align: Option<f64>) -> Result<Option<f64>, LayoutError> {
    let Some(last) = row_y.len().checked_sub(1) else {
        return Ok(None);
    };
    let Some(k) = align else {
        let top = row_y[0] - row_h[0] / 2.0;
        let bottom = row_y[last] + row_h[last] / 2.0;
        return Ok(Some((top + bottom) / 2.0));
    };
    if !(1.0..=row_y.len() as f64).contains(&k) {
        return Err(LayoutError::OutOfRangeAlign { value: k, rows: row_y.len() });
    }
    let lo = k.floor() as usize - 1;
    let t = k - k.floor();
    if t == 0.0 {
        return Ok(Some(row_y[lo]));
    }
    Ok(Some(row_y[lo] + t * (row_y[lo + 1] - row_y[lo])))
}

/// Lays out a resolved circuit.
pub fn layout(rc: &ResolvedCircuit, styler: &Styler, cfg: &GeometryConfig) -> Result<LayoutResult, LayoutError> {
    let m = &cfg.metrics;
    let fs = m.font_size;
    let grid = &rc.grid;
    let (rows, cols) = (grid.rows(), grid.cols());
    let operator = styler.style(StyleRole::Operator, "");
    let gate_height = |label: &str| {
        let el = Element::Gate {
            label: label.to_string(),
            wires: 1,
            min_width: None,
            height_label: None,
            disable_auto_height: false,
            swap_variant: false,
            cwires: Default::default(),
            nwires: Default::default(),
            bundle: Default::default(),
            style: String::new(),
            label_style: String::new(),
            inputs: Vec::new(),
            outputs: Vec::new(),
        };
        measure(&el, &operator, m).1
    };
    let u_height = gate_height("U");

    let mut sizes: BTreeMap<(usize, usize, usize), (f64, f64)> = BTreeMap::new();
    let mut col_w = vec![0.0f64; cols];
    let mut row_h = vec![0.0f64; rows];
    for r in 0..rows {
        for c in 0..cols {
            let cell = grid.cell(r, c);
            if cell.covered_by.is_some() {
                continue;
            }
            for (i, el) in cell.elements().enumerate() {
                let (role, raw) = role_of(el);
                let size = measure(el, &styler.style(role, raw), m);
                sizes.insert((r, c, i), size);
                col_w[c] = col_w[c].max(size.0);
                if !matches!(el, Element::Gate { wires: 2.., .. }) {
                    row_h[r] = row_h[r].max(size.1);
                }
            }
        }
    }
    // Multi-wire gates: every spanned row gets the height of a "U" gate (or of
    // the height label) and an equal share of the box.
    let mut unit_heights = BTreeMap::new();
    for r in 0..rows {
        for c in 0..cols {
            let Element::Gate { wires, disable_auto_height, height_label, .. } = &grid.cell(r, c).element else {
                continue;
            };
            if *wires < 2 {
                continue;
            }
            let share = sizes[&(r, c, 0)].1 / *wires as f64;
            let floor = match (disable_auto_height, height_label) {
                (true, _) => 0.0,
                (false, Some(l)) => gate_height(l),
                (false, None) => u_height,
            };
            let unit = share.max(floor);
            unit_heights.insert((r, c), unit);
            for h in row_h.iter_mut().skip(r).take(*wires) {
                *h = h.max(unit);
            }
        }
    }

    let units = |l: Length| l.to_units(fs);
    let col_extra = grid.col_extra_space.iter().map(|(&k, &v)| (k, units(v))).collect();
    let row_extra = grid.row_extra_space.iter().map(|(&k, &v)| (k, units(v))).collect();
    let col_x = place_columns(&col_w, cfg.units(cfg.column_sep), &col_extra);
    let (row_y, diagnostics) = place_rows(&row_h, cfg.units(cfg.row_sep), &row_extra, cfg.between_origins);

    let mut boxes = BTreeMap::new();
    let mut extents = BTreeMap::new();
    for r in 0..rows {
        for c in 0..cols {
            let cell = grid.cell(r, c);
            if cell.covered_by.is_some() {
                continue;
            }
            let (w, h) = sizes[&(r, c, 0)];
            let (x, y) = (col_x[c], row_y[r]);
            let rect = match &cell.element {
                Element::Gate { wires, .. } if *wires > 1 => {
                    let unit = unit_heights[&(r, c)];
                    let top = y - unit / 2.0;
                    let bottom = row_y[r + wires - 1] + unit / 2.0;
                    let grow = ((h - (bottom - top)) / 2.0).max(0.0);
                    Rect { x: x - w / 2.0, y: top - grow, w, h: bottom - top + 2.0 * grow }
                }
                Element::Stick { side: StickSide::Left, .. } => Rect { x: x + col_w[c] / 2.0 - w, y, w, h: 0.0 },
                Element::Stick { side: StickSide::Right, .. } => Rect { x: x - col_w[c] / 2.0, y, w, h: 0.0 },
                // Wires run straight through spacers.
                Element::Phantom { .. } => Rect::centered(x, y, 0.0, h),
                _ => Rect::centered(x, y, w, h),
            };
            if matches!(cell.element, Element::Gate { .. } | Element::Meter { .. }) {
                boxes.insert((r, c), rect);
            }
            extents.insert((r, c), rect);
        }
    }
    for r in 0..rows {
        for c in 0..cols {
            if let Some(host) = grid.cell(r, c).covered_by {
                let rect = extents[&host];
                extents.insert((r, c), rect);
            }
        }
    }

    let sep = cfg.units(cfg.column_sep);
    let slice_x = rc
        .slices
        .iter()
        .map(|s| {
            let c = s.after_col;
            let right = col_x[c] + col_w[c] / 2.0;
            match col_x.get(c + 1) {
                Some(next) => (right + next - col_w[c + 1] / 2.0) / 2.0,
                None => right + sep / 2.0,
            }
        })
        .collect();
    let group_rects = rc
        .groups
        .iter()
        .map(|g| {
            let (r1, c1) = (g.row + g.group.wires - 1, g.col + g.group.steps - 1);
            let x0 = col_x[g.col] - col_w[g.col] / 2.0;
            let x1 = col_x[c1] + col_w[c1] / 2.0;
            let y0 = row_y[g.row] - row_h[g.row] / 2.0;
            let y1 = row_y[r1] + row_h[r1] / 2.0;
            let style = styler.style(StyleRole::Group, &g.group.style);
            let (dx, dy) = sep_units(&style, fs);
            Rect { x: x0, y: y0, w: x1 - x0, h: y1 - y0 }.inflate(dx, dy)
        })
        .collect();
    let baseline_y = baseline(&row_y, &row_h, rc.env.align_equals_at)?;
    Ok(LayoutResult {
        col_x,
        col_w,
        row_y,
        row_h,
        boxes,
        extents,
        baseline_y,
        slice_x,
        group_rects,
        u_height,
        diagnostics,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{lower, resolve};
    use crate::style::StyleSheet;
    use crate::syntax::parse_document;
    use proptest::prelude::*;

    fn run(src: &str) -> (ResolvedCircuit, LayoutResult) {
        let (grid, env, _) = lower(&parse_document(src).unwrap()).unwrap();
        let rc = resolve(grid, env).unwrap();
        let sheet = StyleSheet::default();
        let styler = Styler { sheet: &sheet, env: &rc.env };
        let lay = layout(&rc, &styler, &GeometryConfig::from_env(&rc.env)).unwrap();
        (rc, lay)
    }

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-9
    }

    #[test]
    fn gate_h_by_hand() {
        // 10pt font, 0.52 advance, 1.2 line height, 3pt inner sep
        let pt = 100.0 / 28.4526;
        let fs = 10.0 * pt;
        let el = Element::Gate {
            label: "H".into(),
            wires: 1,
            min_width: None,
            height_label: None,
            disable_auto_height: false,
            swap_variant: false,
            cwires: Default::default(),
            nwires: Default::default(),
            bundle: Default::default(),
            style: String::new(),
            label_style: String::new(),
            inputs: vec![],
            outputs: vec![],
        };
        let (w, h) = measure(&el, &NodeStyle::default(), &TextMetrics::default());
        assert!(close(w, 0.52 * fs + 6.0 * pt), "{w}");
        assert!(close(h, 1.2 * fs + 6.0 * pt), "{h}");
        assert!((w - 39.3636).abs() < 1e-3 && (h - 63.2628).abs() < 1e-3);
    }

    #[test]
    fn min_width_wins() {
        let (_, lay) = run(r"\gate[wires=2][2cm]{U} \\ \qw");
        assert!(close(lay.boxes[&(0, 0)].w, 200.0));
    }

    #[test]
    fn ghost_has_height_only() {
        let ghost = Element::Phantom { kind: PhantomKind::Ghost, content: "X".into() };
        let (w, h) = measure(&ghost, &NodeStyle::default(), &TextMetrics::default());
        assert_eq!(w, 0.0);
        let (_, lay) = run(r"\gate{X}");
        assert!(close(h, lay.boxes[&(0, 0)].h));
    }

    #[test]
    fn columns_by_hand() {
        assert_eq!(place_columns(&[10.0, 10.0], 5.0, &BTreeMap::new()), [5.0, 20.0]);
        assert_eq!(place_columns(&[10.0, 10.0], 5.0, &BTreeMap::from([(0, 20.0)])), [5.0, 40.0]);
        assert_eq!(place_columns(&[8.0], 5.0, &BTreeMap::new()), [4.0]);
    }

    #[test]
    fn rows_by_hand() {
        assert_eq!(place_rows(&[20.0, 20.0], 10.0, &BTreeMap::new(), false).0, [0.0, 30.0]);
        assert_eq!(place_rows(&[5.0], 10.0, &BTreeMap::new(), false).0, [0.0]);
        let (ys, diags) = place_rows(&[10.0, 10.0, 10.0], 60.0, &BTreeMap::new(), true);
        assert_eq!(ys, [0.0, 60.0, 120.0]);
        assert!(diags.is_empty());
        let (_, diags) = place_rows(&[80.0, 80.0], 60.0, &BTreeMap::new(), true);
        assert_eq!(diags, [LayoutDiagnostic::RowPitchTooSmall(0)]);
    }

    #[test]
    fn baseline_rules() {
        assert_eq!(baseline(&[0.0, 60.0], &[10.0, 10.0], Some(1.5)).unwrap(), Some(30.0));
        assert_eq!(baseline(&[0.0, 60.0], &[10.0, 10.0], Some(1.0)).unwrap(), Some(0.0));
        assert_eq!(baseline(&[0.0, 100.0], &[10.0, 10.0], None).unwrap(), Some(50.0));
        assert_eq!(baseline(&[0.0, 10.0, 30.0], &[0.0; 3], Some(2.5)).unwrap(), Some(20.0));
        assert!(baseline(&[0.0], &[0.0], Some(2.0)).is_err());
        assert_eq!(baseline(&[], &[], None).unwrap(), None);
    }

    #[test]
    fn two_mm_extra_column_space() {
        let (_, plain) = run(r"\lstick{$\ket{0}^{\otimes n}$} & \gate{H}\qwbundle{3} & \qw");
        let (_, spaced) = run(r"\lstick{$\ket{0}^{\otimes n}$} &[2mm] \gate{H}\qwbundle{3} & \qw");
        assert!(close(spaced.col_x[1] - plain.col_x[1], 20.0));
    }

    #[test]
    fn auto_height_and_disable() {
        let mag = r"\begin{array}{c} \text{M} \\ \text{A} \\ \text{J} \end{array}";
        let (_, auto) = run(&format!("\\gate[3]{{{mag}}} \\\\ \\qw \\\\ \\qw"));
        let (_, off) = run(&format!("\\gate[3,disable auto height]{{{mag}}} \\\\ \\qw \\\\ \\qw"));
        assert!(auto.row_h.iter().all(|&h| h >= auto.u_height - 1e-9));
        assert!(off.row_h[0] < auto.row_h[0]);
        let b = auto.boxes[&(0, 0)];
        assert!(close(b.y, -auto.u_height / 2.0));
    }

    #[test]
    fn slice_between_columns() {
        let (_, lay) = run(r"\begin{quantikz}[slice all]\gate{H} & \gate{H} & \qw\end{quantikz}");
        assert_eq!(lay.slice_x.len(), 2);
        for (i, &x) in lay.slice_x.iter().enumerate() {
            assert!(lay.col_x[i] + lay.col_w[i] / 2.0 < x && x < lay.col_x[i + 1] - lay.col_w[i + 1] / 2.0);
        }
    }

    proptest! {
        #[test]
        fn enlarging_never_shrinks_gaps(widths in proptest::collection::vec(0.0f64..200.0, 1..8),
                                         i in any::<prop::sample::Index>(), grow in 0.0f64..100.0,
                                         sep in 0.0f64..50.0) {
            let before = place_columns(&widths, sep, &BTreeMap::new());
            let mut bigger = widths.clone();
            bigger[i.index(widths.len())] += grow;
            let after = place_columns(&bigger, sep, &BTreeMap::new());
            for k in 1..widths.len() {
                prop_assert!(after[k] - after[k - 1] >= before[k] - before[k - 1] - 1e-9);
            }
        }

        #[test]
        fn between_origins_pitch_is_exact(heights in proptest::collection::vec(0.0f64..300.0, 1..8), sep in 1.0f64..200.0) {
            let (ys, _) = place_rows(&heights, sep, &BTreeMap::new(), true);
            for k in 1..ys.len() {
                prop_assert!((ys[k] - ys[k - 1] - sep).abs() < 1e-9);
            }
        }
    }
}
