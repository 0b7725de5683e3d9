/// One `key` or `key=value` entry of an option list.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KeyValue {
    pub key: String,
    pub value: Option<String>,
}

impl KeyValue {
    pub fn new(key: impl Into<String>, value: Option<&str>) -> Self {
        KeyValue { key: key.into(), value: value.map(str::to_string) }
    }
}

/// Splits `raw` at commas that are not nested in `{}`.
fn split_top_level(raw: &str, sep: char) -> Vec<&str> {
    let mut parts = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, c) in raw.char_indices() {
        match c {
            '{' => depth += 1,
            '}' => depth -= 1,
            c if c == sep && depth == 0 => {
                parts.push(&raw[start..i]);
                start = i + c.len_utf8();
            }
            _ => {}
        }
    }
    parts.push(&raw[start..]);
    parts
}

fn collapse_ws(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Strips one pair of braces when they enclose the whole string.
fn strip_outer_braces(s: &str) -> &str {
    let Some(inner) = s.strip_prefix('{').and_then(|r| r.strip_suffix('}')) else {
        return s;
    };
    let mut depth = 0i32;
    for c in inner.chars() {
        match c {
            '{' => depth += 1,
            '}' => {
                depth -= 1;
                if depth < 0 {
                    // `{a}{b}`: the braces are not a single group
                    return s;
                }
            }
            _ => {}
        }
    }
    inner.trim()
}

/// Parses a tikz-style option list: `wires=2,steps=3,style={inner sep=6pt}`.
///
/// Keys are whitespace-normalized; values keep their text but lose one level
/// of enclosing braces. Empty entries are dropped.
pub fn parse_key_values(raw: &str) -> Vec<KeyValue> {
    split_top_level(raw, ',')
        .into_iter()
        .filter_map(|item| {
            let item = item.trim();
            if item.is_empty() {
                return None;
            }
            let mut depth = 0i32;
            let eq = item.char_indices().find(|&(_, c)| {
                match c {
                    '{' => depth += 1,
                    '}' => depth -= 1,
                    _ => {}
                }
                c == '=' && depth == 0
            });
            Some(match eq {
                Some((i, _)) => {
                    let value = strip_outer_braces(item[i + 1..].trim());
                    KeyValue { key: collapse_ws(&item[..i]), value: Some(value.to_string()) }
                }
                None => KeyValue { key: collapse_ws(strip_outer_braces(item)), value: None },
            })
        })
        .collect()
}

/// Inverse of [`parse_key_values`]; every value is wrapped in braces.
pub fn serialize_key_values(pairs: &[KeyValue]) -> String {
    pairs
        .iter()
        .map(|kv| match &kv.value {
            Some(v) => format!("{}={{{}}}", kv.key, v),
            None => kv.key.clone(),
        })
        .collect::<Vec<_>>()
        .join(",")
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn gategroup_options() {
        assert_eq!(
            parse_key_values("wires=2,steps=3,style={inner sep=6pt}"),
            vec![
                KeyValue::new("wires", Some("2")),
                KeyValue::new("steps", Some("3")),
                KeyValue::new("style", Some("inner sep=6pt")),
            ]
        );
    }

    #[test]
    fn bare_keys_and_empty() {
        assert_eq!(parse_key_values("slice all"), vec![KeyValue::new("slice all", None)]);
        assert!(parse_key_values("").is_empty());
        assert!(parse_key_values(" , ,").is_empty());
    }

    #[test]
    fn nested_commas_and_spacing() {
        let kv = parse_key_values("row sep={0.6cm,between origins},  column  sep = 1cm");
        assert_eq!(kv[0], KeyValue::new("row sep", Some("0.6cm,between origins")));
        assert_eq!(kv[1], KeyValue::new("column sep", Some("1cm")));
        let kv = parse_key_values("5,cwires={2,4},nwires={3},bundle={5}");
        assert_eq!(kv.len(), 4);
        assert_eq!(kv[1].value.as_deref(), Some("2,4"));
    }

    #[test]
    fn braces_not_spanning_whole_value_stay() {
        let kv = parse_key_values("label={a}{b}");
        assert_eq!(kv[0].value.as_deref(), Some("{a}{b}"));
    }

    #[test]
    fn equals_inside_value_group() {
        let kv = parse_key_values("style={fill=red!20}, label style={label position=below}");
        assert_eq!(kv[0], KeyValue::new("style", Some("fill=red!20")));
        assert_eq!(kv[1], KeyValue::new("label style", Some("label position=below")));
    }

    fn word() -> impl Strategy<Value = String> {
        "[a-z][a-z ]{0,6}[a-z]".prop_map(|s| s)
    }

    fn value() -> impl Strategy<Value = String> {
        prop_oneof![
            "[a-z0-9.!]{1,6}".prop_map(|s| s),
            ("[a-z]{1,4}", "[a-z0-9]{1,4}").prop_map(|(a, b)| format!("{a}={b}")),
            ("[a-z]{1,4}", "[a-z]{1,4}").prop_map(|(a, b)| format!("{a},{b}")),
        ]
    }

    proptest! {
        #[test]
        fn reserialize_roundtrip(items in proptest::collection::vec((word(), proptest::option::of(value())), 0..6)) {
            let raw = items
                .iter()
                .map(|(k, v)| match v {
                    Some(v) => format!(" {k} = {{{v}}} "),
                    None => format!(" {k} "),
                })
                .collect::<Vec<_>>()
                .join(",");
            let parsed = parse_key_values(&raw);
            let again = parse_key_values(&serialize_key_values(&parsed));
            prop_assert_eq!(&parsed, &again);
            prop_assert_eq!(parsed.len(), items.len());
        }
    }
}
