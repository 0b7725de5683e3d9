//! QCircuit to quantikz source conversion.
//!
//! Only the commands that differ between the two packages are rewritten;
//! everything else is copied through. Findings that need a human (removed
//! ghosts, unknown commands, dropped options) become `%` comment lines in
//! front of the converted circuit.

use crate::model::is_known_command;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Conversion {
    pub text: String,
    /// Advisories, also emitted as leading comments in `text`.
    pub notes: Vec<String>,
}

/// Converts a `\Qcircuit @C=.. @R=.. {..}` circuit. Input without the
/// wrapper is treated as a bare matrix body.
pub fn convert(src: &str) -> Conversion {
    let mut notes = Vec::new();
    let text = match find_wrapper(src) {
        Some(w) => {
            let mut opts = Vec::new();
            if let Some(r) = &w.row_sep {
                opts.push(format!("row sep={r}"));
            }
            if let Some(c) = &w.col_sep {
                opts.push(format!("col sep={c}"));
            }
            for o in &w.dropped {
                notes.push(format!("dropped QCircuit option {o}"));
            }
            let opts = if opts.is_empty() { String::new() } else { format!("[{}]", opts.join(",")) };
            let body = convert_body(&src[w.body.0..w.body.1], &mut notes);
            format!("{}\\begin{{quantikz}}{opts}{body}\\end{{quantikz}}{}", &src[..w.start], &src[w.end..])
        }
        None => convert_body(src, &mut notes),
    };
    let mut out = String::new();
    for n in &notes {
        out.push_str("% ");
        out.push_str(n);
        out.push('\n');
    }
    out.push_str(&text);
    Conversion { text: out, notes }
}

struct Wrapper {
    start: usize,
    end: usize,
    body: (usize, usize),
    row_sep: Option<String>,
    col_sep: Option<String>,
    dropped: Vec<String>,
}

fn find_wrapper(src: &str) -> Option<Wrapper> {
    let start = ["\\Qcircuit", "\\QCircuit"].iter().filter_map(|w| src.find(w)).min()?;
    let b = src.as_bytes();
    let mut i = start + "\\Qcircuit".len();
    let (mut row_sep, mut col_sep, mut dropped) = (None, None, Vec::new());
    loop {
        while i < b.len() && b[i].is_ascii_whitespace() {
            i += 1;
        }
        if i >= b.len() {
            return None;
        }
        match b[i] {
            b'@' => {
                let end = src[i + 1..]
                    .find(|c: char| c.is_whitespace() || c == '@' || c == '{')
                    .map_or(b.len(), |k| i + 1 + k);
                let opt = &src[i..end];
                match opt.strip_prefix("@C=").or_else(|| opt.strip_prefix("@C")) {
                    Some(v) if !v.is_empty() => col_sep = Some(v.to_string()),
                    _ => match opt.strip_prefix("@R=").or_else(|| opt.strip_prefix("@R")) {
                        Some(v) if !v.is_empty() => row_sep = Some(v.to_string()),
                        _ => dropped.push(opt.to_string()),
                    },
                }
                i = end;
            }
            b'{' => {
                let close = matching_brace(src, i)?;
                return Some(Wrapper { start, end: close + 1, body: (i + 1, close), row_sep, col_sep, dropped });
            }
            _ => return None,
        }
    }
}

/// Index of the `}` closing the `{` at `open`.
fn matching_brace(src: &str, open: usize) -> Option<usize> {
    let b = src.as_bytes();
    let mut depth = 0usize;
    let mut i = open;
    while i < b.len() {
        match b[i] {
            b'\\' => i += 1,
            b'%' => {
                while i < b.len() && b[i] != b'\n' {
                    i += 1;
                }
            }
            b'{' => depth += 1,
            b'}' => {
                depth -= 1;
                if depth == 0 {
                    return Some(i);
                }
            }
            _ => {}
        }
        i += 1;
    }
    None
}

/// Splits a matrix body into rows of cells at top-level `\\` and `&`.
fn split_cells(body: &str) -> Vec<Vec<String>> {
    let b = body.as_bytes();
    let mut rows = vec![Vec::new()];
    let (mut depth, mut start, mut i) = (0usize, 0usize, 0usize);
    while i < b.len() {
        match b[i] {
            b'\\' if depth == 0 && b.get(i + 1) == Some(&b'\\') => {
                rows.last_mut().unwrap().push(body[start..i].to_string());
                rows.push(Vec::new());
                i += 2;
                start = i;
                continue;
            }
            b'\\' => i += 1,
            b'%' => {
                while i < b.len() && b[i] != b'\n' {
                    i += 1;
                }
            }
            b'{' => depth += 1,
            b'}' => depth = depth.saturating_sub(1),
            b'&' if depth == 0 => {
                rows.last_mut().unwrap().push(body[start..i].to_string());
                start = i + 1;
            }
            _ => {}
        }
        i += 1;
    }
    rows.last_mut().unwrap().push(body[start..].to_string());
    rows
}

fn join_cells(rows: &[Vec<String>]) -> String {
    rows.iter().map(|r| r.join("&")).collect::<Vec<_>>().join("\\\\")
}

struct Relocation {
    row: usize,
    col: usize,
    text: String,
}

/// Reads a braced argument at `i`, skipping leading spaces. Returns the
/// content and the index after the closing brace.
fn braced_arg(s: &str, mut i: usize) -> Option<(&str, usize)> {
    let b = s.as_bytes();
    while i < b.len() && b[i].is_ascii_whitespace() {
        i += 1;
    }
    if b.get(i) != Some(&b'{') {
        return None;
    }
    let close = matching_brace(s, i)?;
    Some((&s[i + 1..close], close + 1))
}

fn next_is_brace(s: &str, i: usize) -> bool {
    s[i..].trim_start().starts_with('{')
}

fn convert_body(body: &str, notes: &mut Vec<String>) -> String {
    let mut rows = split_cells(body);
    let mut moves = Vec::new();
    for (r, row) in rows.iter_mut().enumerate() {
        for (c, cell) in row.iter_mut().enumerate() {
            *cell = convert_cell(cell, (r + 1, c + 1), notes, &mut moves);
        }
    }
    for m in moves {
        while rows.len() < m.row {
            rows.push(vec![String::new()]);
        }
        let row = &mut rows[m.row - 1];
        while row.len() < m.col {
            row.push(String::new());
        }
        let cell = &mut row[m.col - 1];
        let trimmed = cell.trim_end().len();
        let tail = cell.split_off(trimmed);
        if !cell.is_empty() {
            cell.push(' ');
        }
        cell.push_str(&m.text);
        cell.push_str(&tail);
    }
    join_cells(&rows)
}

fn convert_cell(cell: &str, at: (usize, usize), notes: &mut Vec<String>, moves: &mut Vec<Relocation>) -> String {
    let b = cell.as_bytes();
    let mut out = String::with_capacity(cell.len() + 8);
    let mut i = 0;
    let mut depth = 0usize;
    while i < b.len() {
        let ch = b[i];
        if ch == b'%' {
            let end = cell[i..].find('\n').map_or(b.len(), |k| i + k);
            out.push_str(&cell[i..end]);
            i = end;
            continue;
        }
        if ch == b'{' {
            depth += 1;
        } else if ch == b'}' {
            depth = depth.saturating_sub(1);
        }
        if ch == b'\\' && depth > 0 {
            let len = cell[i + 1..].chars().next().map_or(0, char::len_utf8);
            out.push_str(&cell[i..i + 1 + len]);
            i += 1 + len;
            continue;
        }
        if ch != b'\\' {
            let len = cell[i..].chars().next().map_or(1, char::len_utf8);
            out.push_str(&cell[i..i + len]);
            i += len;
            continue;
        }
        let name_end = cell[i + 1..].find(|c: char| !c.is_ascii_alphabetic()).map_or(b.len(), |k| i + 1 + k);
        if name_end == i + 1 {
            // control symbol
            let len = cell[i + 1..].chars().next().map_or(0, char::len_utf8);
            out.push_str(&cell[i..i + 1 + len]);
            i += 1 + len;
            continue;
        }
        let name = &cell[i + 1..name_end];
        i = name_end;
        match name {
            "multigate" => match braced_arg(cell, i) {
                Some((n, next)) => {
                    let n = n.trim();
                    match n.parse::<usize>() {
                        Ok(k) => out.push_str(&format!("\\gate[{}]", k + 1)),
                        Err(_) => out.push_str(&format!("\\gate[{n}+1]")),
                    }
                    i = next;
                }
                None => {
                    notes.push(format!("\\multigate without a size at row {}, column {}", at.0, at.1));
                    out.push_str("\\multigate");
                }
            },
            "targ" | "control" | "meter" | "measureD" => {
                out.push('\\');
                out.push_str(if name == "measureD" { "meterD" } else { name });
                if !next_is_brace(cell, i) {
                    out.push_str("{}");
                }
            }
            "ctrlo" => out.push_str("\\octrl"),
            "qwx" | "cwx" => {
                let rest = &cell[i..];
                let (offset, used) = match rest.strip_prefix('[').and_then(|r| r.find(']').map(|k| (&r[..k], k + 2))) {
                    Some((v, used)) => (v.trim().to_string(), used),
                    None => ("-1".to_string(), 0),
                };
                let target = if name == "qwx" { "vqw" } else { "vcw" };
                out.push_str(&format!("\\{target}{{{offset}}}"));
                i += used;
            }
            "gategroup" => {
                let mut args = Vec::new();
                let mut j = i;
                while args.len() < 6 {
                    match braced_arg(cell, j) {
                        Some((a, next)) => {
                            args.push(a.trim().to_string());
                            j = next;
                        }
                        None => break,
                    }
                }
                let nums: Option<Vec<usize>> = args.iter().take(4).map(|a| a.parse().ok()).collect();
                match nums {
                    Some(n)
                        if n.len() == 4
                            && args.len() >= 5
                            && n[0] >= 1
                            && n[1] >= 1
                            && n[2] >= n[0]
                            && n[3] >= n[1] =>
                    {
                        let text = format!("\\gategroup[wires={},steps={}]{{}}", n[2] + 1 - n[0], n[3] + 1 - n[1]);
                        moves.push(Relocation { row: n[0], col: n[1], text });
                        i = j;
                    }
                    _ => {
                        notes.push(format!("could not convert \\gategroup at row {}, column {}", at.0, at.1));
                        out.push_str("\\gategroup");
                    }
                }
            }
            "ghost" | "nghost" | "cghost" => {
                let (label, next) = braced_arg(cell, i).unwrap_or(("", i));
                let hint = match name {
                    "nghost" => "; mark the wire with nwires on the gate",
                    "cghost" => "; mark the wire with cwires on the gate",
                    _ => "",
                };
                notes.push(format!("removed \\{name}{{{label}}} at row {}, column {}{hint}", at.0, at.1));
                i = next;
            }
            _ => {
                if !is_known_command(name) {
                    notes.push(format!("unrecognized QCircuit command \\{name} at row {}, column {}", at.0, at.1));
                }
                out.push('\\');
                out.push_str(name);
            }
        }
    }
    out
}
