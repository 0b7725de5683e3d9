use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Color {
    pub r: f64,
    pub g: f64,
    pub b: f64,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ColorError {
    #[error("unknown color `{0}`")]
    UnknownColorName(String),
    #[error("bad mixing percentage `{0}` (expected 0..100)")]
    BadPercent(String),
}

const BASE: &[(&str, Color)] = &[
    ("red", Color::rgb(1.0, 0.0, 0.0)),
    ("green", Color::rgb(0.0, 1.0, 0.0)),
    ("blue", Color::rgb(0.0, 0.0, 1.0)),
    ("cyan", Color::rgb(0.0, 1.0, 1.0)),
    ("magenta", Color::rgb(1.0, 0.0, 1.0)),
    ("yellow", Color::rgb(1.0, 1.0, 0.0)),
    ("black", Color::rgb(0.0, 0.0, 0.0)),
    ("white", Color::rgb(1.0, 1.0, 1.0)),
    ("gray", Color::rgb(0.5, 0.5, 0.5)),
    ("orange", Color::rgb(1.0, 0.5, 0.0)),
];

impl Color {
    pub const BLACK: Color = Color::rgb(0.0, 0.0, 0.0);
    pub const WHITE: Color = Color::rgb(1.0, 1.0, 1.0);

    pub const fn rgb(r: f64, g: f64, b: f64) -> Self {
        Color { r, g, b }
    }

    pub fn named(name: &str) -> Option<Color> {
        BASE.iter().find(|(n, _)| *n == name).map(|(_, c)| *c)
    }

    pub fn is_base_name(name: &str) -> bool {
        Color::named(name).is_some()
    }

    /// `t·self + (1−t)·other`.
    pub fn mix(self, t: f64, other: Color) -> Color {
        let f = |a: f64, b: f64| (t * a + (1.0 - t) * b).clamp(0.0, 1.0);
        Color::rgb(f(self.r, other.r), f(self.g, other.g), f(self.b, other.b))
    }

    /// `#rrggbb`.
    pub fn hex(self) -> String {
        let c = |v: f64| (v.clamp(0.0, 1.0) * 255.0).round() as u8;
        format!("#{:02x}{:02x}{:02x}", c(self.r), c(self.g), c(self.b))
    }
}

impl fmt::Display for Color {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.hex())
    }
}

/// Parses xcolor mixing expressions: `blue`, `blue!20`, `red!50!blue`,
/// `red!50!blue!30!green`, and a trailing `!p` which mixes with white.
pub fn parse_color(spec: &str) -> Result<Color, ColorError> {
    let mut parts = spec.trim().split('!').map(str::trim);
    let first = parts.next().unwrap_or_default();
    let mut acc = Color::named(first).ok_or_else(|| ColorError::UnknownColorName(first.to_string()))?;
    while let Some(p) = parts.next() {
        let pct: f64 = p.parse().map_err(|_| ColorError::BadPercent(p.to_string()))?;
        if !(0.0..=100.0).contains(&pct) {
            return Err(ColorError::BadPercent(p.to_string()));
        }
        let other = match parts.next() {
            Some(name) => Color::named(name).ok_or_else(|| ColorError::UnknownColorName(name.to_string()))?,
            None => Color::WHITE,
        };
        acc = acc.mix(pct / 100.0, other);
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(a: Color, b: Color) -> bool {
        (a.r - b.r).abs() < 1e-9 && (a.g - b.g).abs() < 1e-9 && (a.b - b.b).abs() < 1e-9
    }

    /// Independent blend: walk the expression with explicit percent arithmetic.
    fn oracle(base: [f64; 3], pct: f64, other: [f64; 3]) -> Color {
        let c: Vec<f64> = (0..3).map(|i| (pct * base[i] + (100.0 - pct) * other[i]) / 100.0).collect();
        Color::rgb(c[0], c[1], c[2])
    }

    #[test]
    fn tint_and_mix() {
        assert!(close(parse_color("blue!20").unwrap(), oracle([0., 0., 1.], 20., [1., 1., 1.])));
        assert!(close(parse_color("blue!20").unwrap(), Color::rgb(0.8, 0.8, 1.0)));
        assert!(close(parse_color("red!50!blue").unwrap(), Color::rgb(0.5, 0.0, 0.5)));
        assert!(close(parse_color("red!20").unwrap(), Color::rgb(1.0, 0.8, 0.8)));
        assert_eq!(parse_color("white").unwrap(), Color::WHITE);
    }

    #[test]
    fn errors() {
        assert_eq!(parse_color("teal"), Err(ColorError::UnknownColorName("teal".into())));
        assert_eq!(parse_color("red!x"), Err(ColorError::BadPercent("x".into())));
        assert_eq!(parse_color("red!150"), Err(ColorError::BadPercent("150".into())));
    }

    fn name() -> impl Strategy<Value = &'static str> {
        proptest::sample::select(BASE.iter().map(|(n, _)| *n).collect::<Vec<_>>())
    }

    proptest! {
        #[test]
        fn channels_stay_in_unit_interval(
            a in name(),
            rest in proptest::collection::vec((0u32..=100, proptest::option::of(name())), 0..4),
        ) {
            let mut spec = a.to_string();
            for (p, n) in &rest {
                spec.push_str(&format!("!{p}"));
                if let Some(n) = n {
                    spec.push_str(&format!("!{n}"));
                }
            }
            let c = parse_color(&spec);
            // a bare percentage followed by more mixing parses the next name as a percentage
            if let Ok(c) = c {
                for v in [c.r, c.g, c.b] {
                    prop_assert!((0.0..=1.0).contains(&v));
                }
            }
        }
    }
}
