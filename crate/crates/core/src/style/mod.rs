//! Visual attributes: colors, style key lists, the named style sheet and
//! the layered resolution that produces one [`NodeStyle`] per element.

mod color;

use std::collections::BTreeMap;

pub use color::{parse_color, Color, ColorError};

use crate::model::EnvOptions;
use crate::syntax::{parse_key_values, KeyValue, Length};

/// A stroke or fill.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Paint {
    None,
    Color(Color),
}

impl Paint {
    pub fn color(self) -> Option<Color> {
        match self {
            Paint::None => None,
            Paint::Color(c) => Some(c),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LabelPosition {
    #[default]
    Default,
    Above,
    Below,
    Left,
    Right,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Anchor {
    #[default]
    Center,
    Mid,
    North,
    South,
    East,
    West,
    NorthEast,
    NorthWest,
    SouthEast,
    SouthWest,
}

impl Anchor {
    fn parse(s: &str) -> Option<Anchor> {
        Some(match s {
            "center" | "base" => Anchor::Center,
            "mid" => Anchor::Mid,
            "north" => Anchor::North,
            "south" => Anchor::South,
            "east" => Anchor::East,
            "west" => Anchor::West,
            "north east" => Anchor::NorthEast,
            "north west" => Anchor::NorthWest,
            "south east" => Anchor::SouthEast,
            "south west" => Anchor::SouthWest,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NodeStyle {
    pub stroke: Paint,
    pub fill: Paint,
    /// Text color; falls back to the stroke color when unset.
    pub text: Option<Color>,
    pub line_width: Length,
    pub dashed: bool,
    pub rounded: bool,
    pub inner_xsep: Length,
    pub inner_ysep: Length,
    pub xshift: Length,
    pub yshift: Length,
    pub label_position: LabelPosition,
    pub anchor: Anchor,
    pub rotate_deg: f64,
    pub font_scale: f64,
    pub shorten_start: Length,
    pub shorten_end: Length,
}

pub const LINE_WIDTH: Length = Length::pt(0.6);
pub const THIN_LINE_WIDTH: Length = Length::pt(0.3);
pub const INNER_SEP: Length = Length::pt(3.0);

impl Default for NodeStyle {
    fn default() -> Self {
        NodeStyle {
            stroke: Paint::Color(Color::BLACK),
            fill: Paint::Color(Color::WHITE),
            text: None,
            line_width: LINE_WIDTH,
            dashed: false,
            rounded: false,
            inner_xsep: INNER_SEP,
            inner_ysep: INNER_SEP,
            xshift: Length::ZERO,
            yshift: Length::ZERO,
            label_position: LabelPosition::Default,
            anchor: Anchor::Center,
            rotate_deg: 0.0,
            font_scale: 1.0,
            shorten_start: Length::ZERO,
            shorten_end: Length::ZERO,
        }
    }
}

impl NodeStyle {
    pub fn text_color(&self) -> Color {
        self.text.or(self.stroke.color()).unwrap_or(Color::BLACK)
    }
}

/// A sparse [`NodeStyle`]: only the fields a layer actually sets.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PartialStyle {
    pub stroke: Option<Paint>,
    pub fill: Option<Paint>,
    pub text: Option<Color>,
    pub line_width: Option<Length>,
    pub dashed: Option<bool>,
    pub rounded: Option<bool>,
    pub inner_xsep: Option<Length>,
    pub inner_ysep: Option<Length>,
    pub xshift: Option<Length>,
    pub yshift: Option<Length>,
    pub label_position: Option<LabelPosition>,
    pub anchor: Option<Anchor>,
    pub rotate_deg: Option<f64>,
    pub font_scale: Option<f64>,
    pub shorten_start: Option<Length>,
    pub shorten_end: Option<Length>,
}

macro_rules! each_field {
    ($m:ident) => {
        $m!(
            stroke,
            fill,
            text,
            line_width,
            dashed,
            rounded,
            inner_xsep,
            inner_ysep,
            xshift,
            yshift,
            label_position,
            anchor,
            rotate_deg,
            font_scale,
            shorten_start,
            shorten_end
        )
    };
}

impl PartialStyle {
    /// Field-by-field overlay; `top` wins where it is set.
    pub fn merged(&self, top: &PartialStyle) -> PartialStyle {
        let mut out = self.clone();
        macro_rules! over {
            ($($f:ident),*) => { $( if top.$f.is_some() { out.$f = top.$f.clone(); } )* };
        }
        each_field!(over);
        out
    }

    pub fn apply_to(&self, base: &mut NodeStyle) {
        macro_rules! set {
            ($($f:ident),*) => { $( if let Some(v) = self.$f.clone() { base.$f = v; } )* };
        }
        set!(
            stroke,
            fill,
            line_width,
            dashed,
            rounded,
            inner_xsep,
            inner_ysep,
            xshift,
            yshift,
            label_position,
            anchor,
            rotate_deg,
            font_scale,
            shorten_start,
            shorten_end
        );
        if self.text.is_some() {
            base.text = self.text;
        }
    }

    pub fn is_empty(&self) -> bool {
        *self == PartialStyle::default()
    }
}

fn parse_paint(v: &str) -> Option<Paint> {
    match v.trim() {
        "none" => Some(Paint::None),
        s => parse_color(s).ok().map(Paint::Color),
    }
}

fn position_word(w: &str) -> Option<LabelPosition> {
    let first = w.split_whitespace().next()?;
    let all_known = w.split_whitespace().all(|p| matches!(p, "above" | "below" | "left" | "right"));
    if !all_known {
        return None;
    }
    Some(match first {
        "above" => LabelPosition::Above,
        "below" => LabelPosition::Below,
        "left" => LabelPosition::Left,
        _ => LabelPosition::Right,
    })
}

/// Interprets a tikz node key list. Keys that are not understood come back
/// in the second element (as they were written) so callers can warn.
pub fn parse_style_keys(pairs: &[KeyValue]) -> (PartialStyle, Vec<String>) {
    let mut p = PartialStyle::default();
    let mut unknown = Vec::new();
    for kv in pairs {
        let v = kv.value.as_deref().map(str::trim);
        let len = |s: Option<&str>| s.and_then(|s| s.parse::<Length>().ok());
        let ok = match (kv.key.as_str(), v) {
            ("draw", None) => {
                p.stroke = Some(Paint::Color(Color::BLACK));
                true
            }
            ("draw", Some(c)) => parse_paint(c).map(|c| p.stroke = Some(c)).is_some(),
            ("fill", Some(c)) => parse_paint(c).map(|c| p.fill = Some(c)).is_some(),
            ("text" | "color", Some(c)) => parse_color(c).map(|c| p.text = Some(c)).is_ok(),
            ("line width", l) => len(l).map(|l| p.line_width = Some(l)).is_some(),
            ("thin", None) => {
                p.line_width = Some(THIN_LINE_WIDTH);
                true
            }
            ("dashed", None) => {
                p.dashed = Some(true);
                true
            }
            ("solid", None) => {
                p.dashed = Some(false);
                true
            }
            ("rounded corners", _) => {
                p.rounded = Some(true);
                true
            }
            ("sharp corners", None) => {
                p.rounded = Some(false);
                true
            }
            ("inner sep", l) => len(l)
                .map(|l| {
                    p.inner_xsep = Some(l);
                    p.inner_ysep = Some(l);
                })
                .is_some(),
            ("inner xsep", l) => len(l).map(|l| p.inner_xsep = Some(l)).is_some(),
            ("inner ysep", l) => len(l).map(|l| p.inner_ysep = Some(l)).is_some(),
            ("xshift", l) => len(l).map(|l| p.xshift = Some(l)).is_some(),
            ("yshift", l) => len(l).map(|l| p.yshift = Some(l)).is_some(),
            ("label position", Some(w)) => position_word(w).map(|w| p.label_position = Some(w)).is_some(),
            ("anchor", Some(a)) => Anchor::parse(a).map(|a| p.anchor = Some(a)).is_some(),
            ("rotate", Some(r)) => {
                r.parse::<f64>().ok().filter(|r| r.is_finite()).map(|r| p.rotate_deg = Some(r)).is_some()
            }
            ("scale" | "font scale", Some(s)) => {
                s.parse::<f64>().ok().filter(|s| *s > 0.0 && s.is_finite()).map(|s| p.font_scale = Some(s)).is_some()
            }
            ("shorten <", l) => len(l).map(|l| p.shorten_start = Some(l)).is_some(),
            ("shorten >", l) => len(l).map(|l| p.shorten_end = Some(l)).is_some(),
            (word, None) if Color::is_base_name(word) || word.contains('!') => {
                parse_color(word).map(|c| p.stroke = Some(Paint::Color(c))).is_ok()
            }
            (word, None) => position_word(word).map(|w| p.label_position = Some(w)).is_some(),
            _ => false,
        };
        if !ok {
            unknown.push(match &kv.value {
                Some(v) => format!("{}={}", kv.key, v),
                None => kv.key.clone(),
            });
        }
    }
    (p, unknown)
}

/// Shorthand for `parse_style_keys(&parse_key_values(raw))`.
pub fn parse_style(raw: &str) -> (PartialStyle, Vec<String>) {
    parse_style_keys(&parse_key_values(raw))
}

/// What an element draws, for picking named styles and built-in defaults.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum StyleRole {
    Operator,
    Meter,
    Slice,
    Wave,
    LeftInternal,
    RightInternal,
    /// Left brace.
    Dm,
    /// Right brace.
    Dd,
    Phase,
    OPhase,
    CircleWc,
    CrossX2,
    MyLabel,
    PhaseLabel,
    GgLabel,
    GroupLabel,
    /// Gate-group rectangle.
    Group,
    /// Stick and push labels, slice titles, ebit labels.
    Label,
    /// Plain wires and vertical links.
    Wire,
}

pub const NAMED_STYLES: [&str; 16] = [
    "operator",
    "meter",
    "slice",
    "wave",
    "leftinternal",
    "rightinternal",
    "dm",
    "dd",
    "phase",
    "ophase",
    "circlewc",
    "crossx2",
    "my label",
    "phase label",
    "gg label",
    "group label",
];

impl StyleRole {
    pub fn sheet_name(self) -> Option<&'static str> {
        use StyleRole::*;
        let i = match self {
            Operator => 0,
            Meter => 1,
            Slice => 2,
            Wave => 3,
            LeftInternal => 4,
            RightInternal => 5,
            Dm => 6,
            Dd => 7,
            Phase => 8,
            OPhase => 9,
            CircleWc => 10,
            CrossX2 => 11,
            MyLabel => 12,
            PhaseLabel => 13,
            GgLabel => 14,
            GroupLabel => 15,
            Group | Label | Wire => return None,
        };
        Some(NAMED_STYLES[i])
    }

    /// Elements drawn as filled boxes, which `transparent` clears.
    pub fn is_boxed(self) -> bool {
        matches!(self, StyleRole::Operator | StyleRole::Meter)
    }

    fn builtin(self) -> NodeStyle {
        use StyleRole::*;
        let mut s = NodeStyle::default();
        match self {
            Operator | Meter => {}
            Slice => {
                s.dashed = true;
                s.stroke = Paint::Color(Color::rgb(1.0, 0.0, 0.0));
                s.fill = Paint::None;
            }
            Group => {
                s.dashed = true;
                s.fill = Paint::None;
                s.inner_xsep = Length::pt(4.0);
                s.inner_ysep = Length::pt(4.0);
            }
            Phase => s.fill = Paint::Color(Color::BLACK),
            OPhase | CircleWc => s.fill = Paint::Color(Color::WHITE),
            CrossX2 | Wave | Wire | Dm | Dd => s.fill = Paint::None,
            MyLabel => {
                s.fill = Paint::None;
                s.font_scale = 0.7;
                s.label_position = LabelPosition::Above;
            }
            LeftInternal | RightInternal => {
                s.fill = Paint::None;
                s.font_scale = 0.8;
                s.inner_xsep = Length::pt(1.5);
            }
            PhaseLabel => {
                s.fill = Paint::None;
                s.font_scale = 0.8;
                s.label_position = LabelPosition::Right;
            }
            GroupLabel => {
                s.fill = Paint::None;
                s.font_scale = 0.8;
                s.label_position = LabelPosition::Above;
            }
            GgLabel | Label => s.fill = Paint::None,
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum StyleSheetError {
    #[error("stylesheet is not valid JSON: {0}")]
    Json(String),
    #[error("stylesheet must be an object with a \"styles\" object")]
    Shape,
    #[error("style `{name}`: value of `{key}` must be a string or null")]
    BadValue { name: String, key: String },
}

/// Named global styles, seeded with the documented table (all empty
/// overlays until a user appends to them).
#[derive(Debug, Clone, PartialEq)]
pub struct StyleSheet {
    pub named: BTreeMap<String, PartialStyle>,
    /// `name: key` entries that were not understood.
    pub unknown: Vec<String>,
}

impl Default for StyleSheet {
    fn default() -> Self {
        StyleSheet {
            named: NAMED_STYLES.iter().map(|n| (n.to_string(), PartialStyle::default())).collect(),
            unknown: Vec::new(),
        }
    }
}

impl StyleSheet {
    /// Equivalent of `name/.append style={raw}`.
    pub fn append(&mut self, name: &str, raw: &str) {
        self.append_pairs(name, &parse_key_values(raw));
    }

    pub fn append_pairs(&mut self, name: &str, pairs: &[KeyValue]) {
        let (partial, unknown) = parse_style_keys(pairs);
        self.unknown.extend(unknown.into_iter().map(|k| format!("{name}: {k}")));
        let entry = self.named.entry(name.to_string()).or_default();
        *entry = entry.merged(&partial);
    }

    /// Loads `{"styles": {"operator": {"fill": "red!20", "dashed": null}}}`.
    /// A style may also be given as a raw key list string.
    pub fn from_json(text: &str) -> Result<StyleSheet, StyleSheetError> {
        let mut sheet = StyleSheet::default();
        sheet.merge_json(text)?;
        Ok(sheet)
    }

    pub fn merge_json(&mut self, text: &str) -> Result<(), StyleSheetError> {
        let v: serde_json::Value = serde_json::from_str(text).map_err(|e| StyleSheetError::Json(e.to_string()))?;
        let styles = v.get("styles").and_then(|s| s.as_object()).ok_or(StyleSheetError::Shape)?;
        for (name, body) in styles {
            match body {
                serde_json::Value::String(raw) => self.append(name, raw),
                serde_json::Value::Object(map) => {
                    let mut pairs = Vec::new();
                    for (key, val) in map {
                        let value = match val {
                            serde_json::Value::Null => None,
                            serde_json::Value::String(s) => Some(s.as_str()),
                            _ => return Err(StyleSheetError::BadValue { name: name.clone(), key: key.clone() }),
                        };
                        pairs.push(KeyValue::new(key.as_str(), value));
                    }
                    self.append_pairs(name, &pairs);
                }
                _ => return Err(StyleSheetError::Shape),
            }
        }
        Ok(())
    }

    pub fn get(&self, name: &str) -> Option<&PartialStyle> {
        self.named.get(name)
    }
}

/// Layers, low to high: built-in defaults, the named sheet style for
/// `role`, environment flags, then `per_gate`.
pub fn resolve_style(role: StyleRole, sheet: &StyleSheet, env: &EnvOptions, per_gate: &PartialStyle) -> NodeStyle {
    let mut s = role.builtin();
    if let Some(named) = role.sheet_name().and_then(|n| sheet.get(n)) {
        named.apply_to(&mut s);
    }
    if env.thin_lines {
        s.line_width = if s.line_width == LINE_WIDTH { THIN_LINE_WIDTH } else { s.line_width.scaled(0.5) };
    }
    if env.transparent && role.is_boxed() {
        s.fill = Paint::None;
    }
    per_gate.apply_to(&mut s);
    s
}

/// Resolves styles for one circuit: a sheet plus environment flags.
#[derive(Debug, Clone, Copy)]
pub struct Styler<'a> {
    pub sheet: &'a StyleSheet,
    pub env: &'a EnvOptions,
}

impl Styler<'_> {
    /// Style for `role` with per-element keys from `raw` on top.
    pub fn style(&self, role: StyleRole, raw: &str) -> NodeStyle {
        resolve_style(role, self.sheet, self.env, &parse_style(raw).0)
    }

    /// Style for `role` with an extra named sheet entry layered beneath `raw`.
    pub fn style_with(&self, role: StyleRole, extra: &str, raw: &str) -> NodeStyle {
        let mut per = self.sheet.get(extra).cloned().unwrap_or_default();
        per = per.merged(&parse_style(raw).0);
        resolve_style(role, self.sheet, self.env, &per)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn kv(raw: &str) -> (PartialStyle, Vec<String>) {
        parse_style(raw)
    }

    #[test]
    fn boxing_style_keys() {
        let (p, unknown) = kv("dashed, rounded corners, fill=blue!20, inner xsep=2pt");
        assert!(unknown.is_empty());
        assert_eq!(p.dashed, Some(true));
        assert_eq!(p.rounded, Some(true));
        assert_eq!(p.fill, Some(Paint::Color(parse_color("blue!20").unwrap())));
        assert_eq!(p.inner_xsep, Some(Length::pt(2.0)));
    }

    #[test]
    fn starburst_is_unknown() {
        let (p, unknown) = kv("starburst,fill=yellow");
        assert_eq!(unknown, ["starburst"]);
        assert_eq!(p.fill, Some(Paint::Color(Color::rgb(1.0, 1.0, 0.0))));
        assert!(kv("").0.is_empty());
    }

    #[test]
    fn bare_words() {
        let (p, u) = kv("green,label position=above");
        assert!(u.is_empty());
        assert_eq!(p.stroke, Some(Paint::Color(Color::rgb(0.0, 1.0, 0.0))));
        assert_eq!(p.label_position, Some(LabelPosition::Above));
        let (p, u) = kv("above right,xshift=0.3cm");
        assert!(u.is_empty());
        assert_eq!(p.label_position, Some(LabelPosition::Above));
        let (p, u) = kv("inner sep=1pt,anchor=south west,rotate=40");
        assert!(u.is_empty());
        assert_eq!(p.anchor, Some(Anchor::SouthWest));
        assert_eq!(p.rotate_deg, Some(40.0));
        let (p, u) = kv("shorten <=-0.1cm,shorten >=-0.1cm");
        assert!(u.is_empty());
        assert_eq!(p.shorten_start, Some(Length::cm(-0.1)));
    }

    #[test]
    fn sheet_has_all_documented_names() {
        let sheet = StyleSheet::default();
        for n in NAMED_STYLES {
            assert!(sheet.get(n).is_some(), "{n}");
        }
        assert_eq!(sheet.named.len(), 16);
    }

    #[test]
    fn operator_append_fills_gates() {
        let mut sheet = StyleSheet::default();
        sheet.append("operator", "fill=red!20");
        let s = resolve_style(StyleRole::Operator, &sheet, &EnvOptions::default(), &PartialStyle::default());
        assert_eq!(s.fill, Paint::Color(Color::rgb(1.0, 0.8, 0.8)));
    }

    #[test]
    fn per_gate_beats_transparent() {
        let env = EnvOptions { transparent: true, ..EnvOptions::default() };
        let (own, _) = kv("fill=yellow");
        let s = resolve_style(StyleRole::Operator, &StyleSheet::default(), &env, &own);
        assert_eq!(s.fill, Paint::Color(Color::rgb(1.0, 1.0, 0.0)));
        let s = resolve_style(StyleRole::Operator, &StyleSheet::default(), &env, &PartialStyle::default());
        assert_eq!(s.fill, Paint::None);
    }

    #[test]
    fn identity_merge_is_builtin() {
        let s = resolve_style(
            StyleRole::Operator,
            &StyleSheet::default(),
            &EnvOptions::default(),
            &PartialStyle::default(),
        );
        assert_eq!(s, NodeStyle::default());
    }

    #[test]
    fn json_sheet() {
        let sheet = StyleSheet::from_json(r#"{"styles": {"operator": {"fill": "red!20"}, "my label": "above right,xshift=0.3cm", "phase": {"dashed": null}}}"#).unwrap();
        assert_eq!(sheet.get("operator").unwrap().fill, Some(Paint::Color(Color::rgb(1.0, 0.8, 0.8))));
        assert_eq!(sheet.get("my label").unwrap().xshift, Some(Length::cm(0.3)));
        assert_eq!(sheet.get("phase").unwrap().dashed, Some(true));
        assert!(StyleSheet::from_json("[]").is_err());
        assert!(StyleSheet::from_json(r#"{"styles": {"x": {"fill": 3}}}"#).is_err());
    }

    fn partial() -> impl Strategy<Value = PartialStyle> {
        let len = proptest::option::of((-5.0f64..5.0).prop_map(Length::pt));
        (
            proptest::option::of(any::<bool>()),
            proptest::option::of(any::<bool>()),
            len.clone(),
            len.clone(),
            len,
            proptest::option::of(proptest::sample::select(vec![
                Paint::None,
                Paint::Color(Color::WHITE),
                Paint::Color(Color::rgb(1.0, 0.8, 0.8)),
            ])),
            proptest::option::of(0.1f64..3.0),
        )
            .prop_map(|(dashed, rounded, lw, xs, ys, fill, fs)| PartialStyle {
                dashed,
                rounded,
                line_width: lw,
                inner_xsep: xs,
                inner_ysep: ys,
                fill,
                font_scale: fs,
                ..PartialStyle::default()
            })
    }

    proptest! {
        #[test]
        fn merge_is_associative(a in partial(), b in partial(), c in partial()) {
            prop_assert_eq!(a.merged(&b).merged(&c), a.merged(&b.merged(&c)));
            let mut seq = NodeStyle::default();
            a.apply_to(&mut seq);
            b.apply_to(&mut seq);
            c.apply_to(&mut seq);
            let mut once = NodeStyle::default();
            a.merged(&b).merged(&c).apply_to(&mut once);
            prop_assert_eq!(seq, once);
        }

        #[test]
        fn env_flags_touch_only_their_fields(own in partial(), role in proptest::sample::select(vec![
            StyleRole::Operator, StyleRole::Meter, StyleRole::Phase, StyleRole::Slice, StyleRole::Group, StyleRole::Wire,
        ])) {
            let sheet = StyleSheet::default();
            let plain = resolve_style(role, &sheet, &EnvOptions::default(), &own);
            let thin = resolve_style(role, &sheet, &EnvOptions { thin_lines: true, ..EnvOptions::default() }, &own);
            let clear = resolve_style(role, &sheet, &EnvOptions { transparent: true, ..EnvOptions::default() }, &own);
            prop_assert_eq!(NodeStyle { line_width: plain.line_width, ..thin.clone() }, plain.clone());
            prop_assert_eq!(NodeStyle { fill: plain.fill, ..clear }, plain.clone());
            if own.line_width.is_none() {
                prop_assert!((thin.line_width.to_units(0.0) - plain.line_width.to_units(0.0) / 2.0).abs() < 1e-12);
            }
        }
    }
}
