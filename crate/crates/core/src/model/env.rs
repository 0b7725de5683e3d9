use super::{Lint, LintCode, ModelError};
use crate::style::parse_style;
use crate::syntax::{parse_key_values, KeyValue, Length};

pub const DEFAULT_COLUMN_SEP: Length = Length::cm(0.5);
pub const DEFAULT_ROW_SEP: Length = Length::cm(0.25);

/// Options of the `quantikz`/`tikzcd` environment.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvOptions {
    pub row_sep: Length,
    pub between_origins: bool,
    pub column_sep: Length,
    pub slice_all: bool,
    pub remove_end_slices: usize,
    /// Template for slice titles; `\col` becomes the slice number.
    pub slice_titles: Option<String>,
    pub slice_style: String,
    pub slice_label_style: String,
    pub vertical_slice_labels: bool,
    pub align_equals_at: Option<f64>,
    pub thin_lines: bool,
    pub transparent: bool,
    pub ampersand_replacement: bool,
}

impl Default for EnvOptions {
    fn default() -> Self {
        EnvOptions {
            row_sep: DEFAULT_ROW_SEP,
            between_origins: false,
            column_sep: DEFAULT_COLUMN_SEP,
            slice_all: false,
            remove_end_slices: 0,
            slice_titles: None,
            slice_style: String::new(),
            slice_label_style: String::new(),
            vertical_slice_labels: false,
            align_equals_at: None,
            thin_lines: false,
            transparent: false,
            ampersand_replacement: false,
        }
    }
}

fn bad(kv: &KeyValue) -> ModelError {
    let key = match &kv.value {
        Some(v) => format!("{}={}", kv.key, v),
        None => kv.key.clone(),
    };
    ModelError::BadKey { key, command: "begin{quantikz}".into(), pos: 0 }
}

fn length(kv: &KeyValue) -> Result<Length, ModelError> {
    kv.value.as_deref().and_then(|v| v.parse().ok()).ok_or_else(|| bad(kv))
}

/// Reads environment options. Unknown keys are not fatal; they come back
/// as L7 lints.
pub fn parse_env_options(pairs: &[KeyValue]) -> Result<(EnvOptions, Vec<Lint>), ModelError> {
    let mut env = EnvOptions::default();
    let mut lints = Vec::new();
    let mut style_lints = |what: &str, raw: &str| {
        for k in parse_style(raw).1 {
            lints.push(Lint::new(
                LintCode::L7,
                format!("{what}: style key `{k}` is not supported and was ignored"),
                None,
            ));
        }
    };
    let mut unknown = Vec::new();
    for kv in pairs {
        let flag = kv.value.is_none();
        match kv.key.as_str() {
            "row sep" => {
                let raw = kv.value.as_deref().ok_or_else(|| bad(kv))?;
                for part in parse_key_values(raw) {
                    match (part.key.as_str(), &part.value) {
                        ("between origins", None) => env.between_origins = true,
                        (len, None) => env.row_sep = len.parse().map_err(|_| bad(kv))?,
                        _ => return Err(bad(kv)),
                    }
                }
            }
            "column sep" | "col sep" => env.column_sep = length(kv)?,
            "slice all" if flag => env.slice_all = true,
            "remove end slices" => {
                env.remove_end_slices =
                    kv.value.as_deref().and_then(|v| v.trim().parse().ok()).ok_or_else(|| bad(kv))?
            }
            "slice titles" => env.slice_titles = Some(kv.value.clone().unwrap_or_default()),
            "slice style" => {
                env.slice_style = kv.value.clone().unwrap_or_default();
                style_lints("slice style", &env.slice_style);
            }
            "slice label style" => {
                env.slice_label_style = kv.value.clone().unwrap_or_default();
                style_lints("slice label style", &env.slice_label_style);
            }
            "vertical slice labels" if flag => env.vertical_slice_labels = true,
            "align equals at" => {
                let v = kv
                    .value
                    .as_deref()
                    .and_then(|v| v.trim().parse::<f64>().ok())
                    .filter(|v| v.is_finite() && *v >= 1.0)
                    .ok_or_else(|| bad(kv))?;
                env.align_equals_at = Some(v);
            }
            "thin lines" if flag => env.thin_lines = true,
            "transparent" if flag => env.transparent = true,
            "ampersand replacement" => env.ampersand_replacement = true,
            _ => unknown.push(kv.key.clone()),
        }
    }
    for k in unknown {
        lints.push(Lint::new(LintCode::L7, format!("environment option `{k}` is not supported and was ignored"), None));
    }
    Ok((env, lints))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn env(raw: &str) -> EnvOptions {
        parse_env_options(&parse_key_values(raw)).unwrap().0
    }

    #[test]
    fn spacing_keys() {
        let e = env("row sep={0.6cm,between origins}");
        assert_eq!(e.row_sep, Length::cm(0.6));
        assert!(e.between_origins);
        assert_eq!(env("column sep=1cm").column_sep, Length::cm(1.0));
        assert_eq!(env("col sep=0.3cm").column_sep, Length::cm(0.3));
        assert_eq!(env("row sep=0.1cm").row_sep, Length::cm(0.1));
    }

    #[test]
    fn slicing_keys() {
        let e = env(
            r"slice all,remove end slices=1,slice titles=slice \col,slice style=blue,slice label style={inner sep=1pt,anchor=south west,rotate=40}",
        );
        assert!(e.slice_all);
        assert_eq!(e.remove_end_slices, 1);
        assert_eq!(e.slice_titles.as_deref(), Some(r"slice \col"));
        assert_eq!(e.slice_style, "blue");
        assert_eq!(e.slice_label_style, "inner sep=1pt,anchor=south west,rotate=40");
    }

    #[test]
    fn flags_and_alignment() {
        let e = env(r"align equals at=1.5,thin lines,transparent,ampersand replacement=\&,vertical slice labels");
        assert_eq!(e.align_equals_at, Some(1.5));
        assert!(e.thin_lines && e.transparent && e.ampersand_replacement && e.vertical_slice_labels);
    }

    #[test]
    fn unknown_keys_lint_and_bad_values_fail() {
        let (_, lints) = parse_env_options(&parse_key_values("execute at end picture=x")).unwrap();
        assert_eq!(lints.len(), 1);
        assert_eq!(lints[0].code, LintCode::L7);
        assert!(parse_env_options(&parse_key_values("row sep=wide")).is_err());
        assert!(parse_env_options(&parse_key_values("align equals at=0.5")).is_err());
    }
}
