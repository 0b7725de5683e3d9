use std::fmt;
use std::str::FromStr;

/// Internal drawing units per centimetre. Every geometric quantity in the
/// crate is expressed in these units.
pub const UNITS_PER_CM: f64 = 100.0;

/// TeX points per centimetre.
pub const PT_PER_CM: f64 = 28.4526;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Unit {
    Cm,
    Mm,
    Pt,
    Em,
}

impl Unit {
    pub fn suffix(self) -> &'static str {
        match self {
            Unit::Cm => "cm",
            Unit::Mm => "mm",
            Unit::Pt => "pt",
            Unit::Em => "em",
        }
    }
}

/// A TeX dimension such as `2mm`, `-0.3cm` or `.7em`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Length {
    pub magnitude: f64,
    pub unit: Unit,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("`{0}` is not a length (expected a number followed by cm, mm, pt or em)")]
pub struct LengthError(pub String);

impl Length {
    pub const ZERO: Length = Length { magnitude: 0.0, unit: Unit::Pt };

    pub const fn new(magnitude: f64, unit: Unit) -> Self {
        Length { magnitude, unit }
    }

    pub const fn cm(v: f64) -> Self {
        Length::new(v, Unit::Cm)
    }

    pub const fn mm(v: f64) -> Self {
        Length::new(v, Unit::Mm)
    }

    pub const fn pt(v: f64) -> Self {
        Length::new(v, Unit::Pt)
    }

    pub const fn em(v: f64) -> Self {
        Length::new(v, Unit::Em)
    }

    /// Converts to internal units. `em` is relative to `font_size` (itself in
    /// internal units).
    pub fn to_units(self, font_size: f64) -> f64 {
        let per_unit = match self.unit {
            Unit::Cm => UNITS_PER_CM,
            Unit::Mm => UNITS_PER_CM / 10.0,
            Unit::Pt => UNITS_PER_CM / PT_PER_CM,
            Unit::Em => font_size,
        };
        self.magnitude * per_unit
    }

    pub fn scaled(self, factor: f64) -> Self {
        Length::new(self.magnitude * factor, self.unit)
    }
}

impl FromStr for Length {
    type Err = LengthError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || LengthError(s.to_string());
        let t = s.trim();
        let num_end = t
            .char_indices()
            .find(|&(i, c)| !(c.is_ascii_digit() || c == '.' || ((c == '-' || c == '+') && i == 0)))
            .map(|(i, _)| i)
            .unwrap_or(t.len());
        let (num, rest) = t.split_at(num_end);
        if !num.bytes().any(|b| b.is_ascii_digit()) || num.matches('.').count() > 1 {
            return Err(err());
        }
        let magnitude: f64 = num.parse().map_err(|_| err())?;
        if !magnitude.is_finite() {
            return Err(err());
        }
        let unit = match rest.trim_start() {
            "cm" => Unit::Cm,
            "mm" => Unit::Mm,
            "pt" => Unit::Pt,
            "em" => Unit::Em,
            _ => return Err(err()),
        };
        Ok(Length { magnitude, unit })
    }
}

impl fmt::Display for Length {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.magnitude, self.unit.suffix())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_units_and_signs() {
        assert_eq!("2mm".parse::<Length>().unwrap(), Length::mm(2.0));
        assert_eq!("-0.3cm".parse::<Length>().unwrap(), Length::cm(-0.3));
        assert_eq!(".7em".parse::<Length>().unwrap(), Length::em(0.7));
        assert_eq!("6 pt".parse::<Length>().unwrap(), Length::pt(6.0));
        assert!("2".parse::<Length>().is_err());
        assert!("cm".parse::<Length>().is_err());
        assert!("1.2.3cm".parse::<Length>().is_err());
        assert!("2in".parse::<Length>().is_err());
    }

    #[test]
    fn conversion_table() {
        assert_eq!(Length::cm(1.0).to_units(0.0), 100.0);
        assert_eq!(Length::mm(1.0).to_units(0.0), 10.0);
        assert!((Length::pt(28.4526).to_units(0.0) - 100.0).abs() < 1e-12);
        assert_eq!(Length::em(2.0).to_units(35.0), 70.0);
    }
}
