//! Tokenizing and parsing of quantikz matrix source.
//!
//! The parser is deliberately untyped: every `\command[opt]...{arg}...` in a
//! cell becomes a [`CommandCall`] with raw argument strings, and it is the
//! `model` layer that decides what the commands mean.

mod keyval;
mod length;
mod token;

use std::collections::BTreeMap;

pub use keyval::{parse_key_values, serialize_key_values, KeyValue};
pub use length::{Length, LengthError, Unit, PT_PER_CM, UNITS_PER_CM};
pub use token::{tokenize, Token, TokenKind};

/// Byte range into the source text.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, PartialOrd, Ord)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub const fn new(start: usize, end: usize) -> Self {
        Span { start, end }
    }

    pub fn join(self, other: Span) -> Span {
        Span::new(self.start.min(other.start), self.end.max(other.end))
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SyntaxError {
    #[error("unbalanced brace")]
    UnbalancedBraces(usize),
    #[error("unterminated option block")]
    UnterminatedOptionBlock(usize),
    #[error("unsupported control symbol (only \\\\, \\& and control space are allowed)")]
    InvalidControlSymbol(usize),
    #[error("`{text}` is not a length")]
    BadLength { text: String, pos: usize },
    #[error("missing \\end{{{env}}}")]
    MissingEnd { env: String, pos: usize },
}

impl SyntaxError {
    /// Byte offset of the problem in the original source.
    pub fn position(&self) -> usize {
        match self {
            SyntaxError::UnbalancedBraces(p)
            | SyntaxError::UnterminatedOptionBlock(p)
            | SyntaxError::InvalidControlSymbol(p) => *p,
            SyntaxError::BadLength { pos, .. } | SyntaxError::MissingEnd { pos, .. } => *pos,
        }
    }

    fn shifted(mut self, by: usize) -> Self {
        match &mut self {
            SyntaxError::UnbalancedBraces(p)
            | SyntaxError::UnterminatedOptionBlock(p)
            | SyntaxError::InvalidControlSymbol(p) => *p += by,
            SyntaxError::BadLength { pos, .. } | SyntaxError::MissingEnd { pos, .. } => *pos += by,
        }
        self
    }
}

/// One `\name[opt]...{arg}...` invocation with its raw arguments.
#[derive(Debug, Clone, PartialEq)]
pub struct CommandCall {
    pub name: String,
    pub opt_args: Vec<String>,
    pub braced_args: Vec<String>,
    pub span: Span,
}

impl CommandCall {
    pub fn arg(&self, i: usize) -> Option<&str> {
        self.braced_args.get(i).map(String::as_str)
    }

    pub fn opt(&self, i: usize) -> Option<&str> {
        self.opt_args.get(i).map(String::as_str)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum CellItem {
    Command(CommandCall),
    /// Free text between commands, whitespace-trimmed and never empty.
    Text {
        content: String,
        span: Span,
    },
    InlineNodeStyle {
        raw: String,
        span: Span,
    },
}

impl CellItem {
    pub fn span(&self) -> Span {
        match self {
            CellItem::Command(c) => c.span,
            CellItem::Text { span, .. } | CellItem::InlineNodeStyle { span, .. } => *span,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct CellSource {
    pub items: Vec<CellItem>,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct RowSource {
    pub cells: Vec<CellSource>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatrixSource {
    /// `quantikz` or `tikzcd`.
    pub env_name: String,
    /// Contents of the environment's `[...]` block, braces intact.
    pub env_options_raw: String,
    pub rows: Vec<RowSource>,
    /// Extra space keyed by column gap (gap `i` sits between columns `i` and `i + 1`).
    pub col_extra_space: BTreeMap<usize, Length>,
    /// Extra space keyed by row gap.
    pub row_extra_space: BTreeMap<usize, Length>,
    /// Span of a `\\` that ends the last row, if any.
    pub trailing_row_separator: Option<Span>,
}

impl MatrixSource {
    pub fn env_options(&self) -> Vec<KeyValue> {
        parse_key_values(&self.env_options_raw)
    }
}

struct Envelope {
    env_name: String,
    options: String,
    body: Span,
}

fn find_outside_comments(src: &str, from: usize, needle: &str) -> Option<usize> {
    let mut offset = from;
    for line in src[from..].split_inclusive('\n') {
        let code_end = line.find('%').unwrap_or(line.len());
        if let Some(i) = line[..code_end].find(needle) {
            return Some(offset + i);
        }
        offset += line.len();
    }
    None
}

/// Reads `[...]` starting at `open` (which must be `[`), respecting braces.
/// Returns the contents and the offset just past `]`.
fn bracket_block(src: &str, open: usize) -> Result<(String, usize), SyntaxError> {
    let mut depth = 0usize;
    for (i, c) in src[open + 1..].char_indices() {
        match c {
            '{' => depth += 1,
            '}' => {
                depth = depth.checked_sub(1).ok_or(SyntaxError::UnbalancedBraces(open + 1 + i))?;
            }
            ']' if depth == 0 => {
                let end = open + 1 + i;
                return Ok((src[open + 1..end].to_string(), end + 1));
            }
            _ => {}
        }
    }
    Err(SyntaxError::UnterminatedOptionBlock(open))
}

fn envelope(src: &str) -> Result<Envelope, SyntaxError> {
    let begin = ["quantikz", "tikzcd"]
        .iter()
        .filter_map(|env| find_outside_comments(src, 0, &format!("\\begin{{{env}}}")).map(|p| (p, *env)))
        .min();
    if let Some((at, env)) = begin {
        let mut body_start = at + format!("\\begin{{{env}}}").len();
        let mut options = String::new();
        let rest = &src[body_start..];
        let ws = rest.len() - rest.trim_start().len();
        if rest[ws..].starts_with('[') {
            let (opts, after) = bracket_block(src, body_start + ws)?;
            options = opts;
            body_start = after;
        }
        let end_tag = format!("\\end{{{env}}}");
        let body_end = find_outside_comments(src, body_start, &end_tag)
            .ok_or(SyntaxError::MissingEnd { env: env.to_string(), pos: at })?;
        return Ok(Envelope { env_name: env.to_string(), options, body: Span::new(body_start, body_end) });
    }
    let mut options = String::new();
    let first = src.lines().next().unwrap_or("");
    if let Some(header) = first.trim_start().strip_prefix("%!quantikz") {
        let header = header.trim();
        options = match header.strip_prefix('[').and_then(|h| h.strip_suffix(']')) {
            Some(inner) => inner.to_string(),
            None => header.to_string(),
        };
    }
    Ok(Envelope { env_name: "quantikz".into(), options, body: Span::new(0, src.len()) })
}

/// Parses a `.qtz` document: either a bare matrix body (optionally preceded
/// by a `%!quantikz [options]` header line) or a full
/// `\begin{quantikz}...\end{quantikz}` environment.
pub fn parse_document(source: &str) -> Result<MatrixSource, SyntaxError> {
    let env = envelope(source)?;
    let amp = parse_key_values(&env.options).iter().any(|kv| kv.key == "ampersand replacement");
    let body = &source[env.body.start..env.body.end];
    let mut tokens = tokenize(body, amp).map_err(|e| e.shifted(env.body.start))?;
    for t in &mut tokens {
        t.span = Span::new(t.span.start + env.body.start, t.span.end + env.body.start);
    }
    let mut builder = Builder::new(source, env.body.start);
    builder.consume(&tokens)?;
    let (rows, trailing) = builder.finish();
    Ok(MatrixSource {
        env_name: env.env_name,
        env_options_raw: env.options,
        rows,
        col_extra_space: builder_col(&tokens, source),
        row_extra_space: builder_row(&tokens),
        trailing_row_separator: trailing,
    })
}

fn builder_row(tokens: &[Token]) -> BTreeMap<usize, Length> {
    let mut map = BTreeMap::new();
    let mut row = 0;
    for t in tokens {
        if let TokenKind::RowSeparator(extra) = &t.kind {
            if let Some(len) = extra {
                map.insert(row, *len);
            }
            row += 1;
        }
    }
    map
}

/// `&[len]` entries; when several rows set the same gap the largest wins.
fn builder_col(tokens: &[Token], source: &str) -> BTreeMap<usize, Length> {
    let mut map: BTreeMap<usize, Length> = BTreeMap::new();
    let mut col = 0;
    let mut i = 0;
    while i < tokens.len() {
        match &tokens[i].kind {
            TokenKind::RowSeparator(_) => col = 0,
            TokenKind::CellSeparator => {
                if matches!(tokens.get(i + 1).map(|t| &t.kind), Some(TokenKind::OptionOpen)) {
                    if let Some(close) = tokens[i + 1..].iter().position(|t| t.kind == TokenKind::OptionClose) {
                        let close = i + 1 + close;
                        let raw = &source[tokens[i + 1].span.end..tokens[close].span.start];
                        if let Ok(len) = raw.parse::<Length>() {
                            let bigger = map.get(&col).is_none_or(|old| old.to_units(0.0) < len.to_units(0.0));
                            if bigger {
                                map.insert(col, len);
                            }
                        }
                    }
                }
                col += 1;
            }
            _ => {}
        }
        i += 1;
    }
    map
}

struct Builder<'a> {
    src: &'a str,
    rows: Vec<RowSource>,
    row: RowSource,
    cell: CellSource,
    text: Option<(String, Span)>,
    any_content_since_row: bool,
    last_row_sep: Option<Span>,
}

impl<'a> Builder<'a> {
    fn new(src: &'a str, start: usize) -> Self {
        Builder {
            src,
            rows: Vec::new(),
            row: RowSource::default(),
            cell: CellSource { items: Vec::new(), span: Span::new(start, start) },
            text: None,
            any_content_since_row: false,
            last_row_sep: None,
        }
    }

    fn flush_text(&mut self) {
        if let Some((text, span)) = self.text.take() {
            let mut content = text.trim().to_string();
            // keep the space of a trailing control space (`\ `)
            let slashes = content.chars().rev().take_while(|&c| c == '\\').count();
            if slashes % 2 == 1 && text.trim_start().len() > content.len() {
                content.push(' ');
            }
            if !content.is_empty() {
                self.cell.items.push(CellItem::Text { content, span });
            }
        }
    }

    fn add_text(&mut self, s: &str, span: Span) {
        match &mut self.text {
            Some((t, sp)) => {
                t.push_str(s);
                *sp = sp.join(span);
            }
            None => self.text = Some((s.to_string(), span)),
        }
    }

    fn end_cell(&mut self, at: usize) {
        self.flush_text();
        let mut cell = std::mem::take(&mut self.cell);
        cell.span.end = at;
        self.row.cells.push(cell);
        self.cell.span = Span::new(at, at);
    }

    fn consume(&mut self, tokens: &[Token]) -> Result<(), SyntaxError> {
        let mut i = 0;
        while i < tokens.len() {
            let tok = &tokens[i];
            if !tok.is_trivia() && !matches!(tok.kind, TokenKind::RowSeparator(_)) {
                self.any_content_since_row = true;
            }
            match &tok.kind {
                TokenKind::Whitespace => {
                    if self.text.is_some() {
                        self.add_text(" ", tok.span);
                    }
                    i += 1;
                }
                TokenKind::Comment => i += 1,
                TokenKind::CellSeparator => {
                    self.end_cell(tok.span.start);
                    self.cell.span = Span::new(tok.span.end, tok.span.end);
                    i += 1;
                    // `&[len]` belongs to the separator
                    if matches!(tokens.get(i).map(|t| &t.kind), Some(TokenKind::OptionOpen)) {
                        let close = matching(tokens, i, &TokenKind::OptionOpen, &TokenKind::OptionClose)?;
                        let raw = &self.src[tokens[i].span.end..tokens[close].span.start];
                        raw.parse::<Length>()
                            .map_err(|_| SyntaxError::BadLength { text: raw.to_string(), pos: tokens[i].span.end })?;
                        i = close + 1;
                        self.cell.span = Span::new(tokens[close].span.end, tokens[close].span.end);
                    }
                }
                TokenKind::RowSeparator(_) => {
                    self.end_cell(tok.span.start);
                    let row = std::mem::take(&mut self.row);
                    self.rows.push(row);
                    self.cell.span = Span::new(tok.span.end, tok.span.end);
                    self.any_content_since_row = false;
                    self.last_row_sep = Some(tok.span);
                    i += 1;
                }
                TokenKind::Command(name) => {
                    self.flush_text();
                    let (call, next) = self.command(tokens, i, name)?;
                    self.cell.items.push(CellItem::Command(call));
                    i = next;
                }
                TokenKind::InlineNodeStyle(raw) => {
                    self.flush_text();
                    self.cell.items.push(CellItem::InlineNodeStyle { raw: raw.clone(), span: tok.span });
                    i += 1;
                }
                TokenKind::BeginGroup => {
                    // a free-standing group is text, e.g. `{\sc swap}`
                    let close = matching(tokens, i, &TokenKind::BeginGroup, &TokenKind::EndGroup)?;
                    let span = Span::new(tok.span.start, tokens[close].span.end);
                    let raw = self.src[span.start..span.end].to_string();
                    self.add_text(&raw, span);
                    i = close + 1;
                }
                TokenKind::Text(t) => {
                    let t = t.clone();
                    self.add_text(&t, tok.span);
                    i += 1;
                }
                TokenKind::OptionOpen | TokenKind::OptionClose | TokenKind::EndGroup => {
                    let raw = self.src[tok.span.start..tok.span.end].to_string();
                    self.add_text(&raw, tok.span);
                    i += 1;
                }
            }
        }
        Ok(())
    }

    fn command(&self, tokens: &[Token], at: usize, name: &str) -> Result<(CommandCall, usize), SyntaxError> {
        let start = tokens[at].span.start;
        let mut end = tokens[at].span.end;
        let mut opt_args = Vec::new();
        let mut braced_args = Vec::new();
        let mut i = at + 1;
        let skip_trivia = |mut j: usize| {
            while tokens.get(j).is_some_and(Token::is_trivia) {
                j += 1;
            }
            j
        };
        loop {
            let j = skip_trivia(i);
            match tokens.get(j).map(|t| &t.kind) {
                Some(TokenKind::OptionOpen) if braced_args.is_empty() => {
                    let close = matching(tokens, j, &TokenKind::OptionOpen, &TokenKind::OptionClose)?;
                    opt_args.push(self.src[tokens[j].span.end..tokens[close].span.start].to_string());
                    end = tokens[close].span.end;
                    i = close + 1;
                }
                Some(TokenKind::BeginGroup) => {
                    let close = matching(tokens, j, &TokenKind::BeginGroup, &TokenKind::EndGroup)?;
                    braced_args.push(self.src[tokens[j].span.end..tokens[close].span.start].to_string());
                    end = tokens[close].span.end;
                    i = close + 1;
                }
                _ => break,
            }
        }
        let call = CommandCall { name: name.to_string(), opt_args, braced_args, span: Span::new(start, end) };
        Ok((call, i))
    }

    fn finish(&mut self) -> (Vec<RowSource>, Option<Span>) {
        if !self.any_content_since_row && !self.rows.is_empty() {
            // only trivia after the last `\\`
            return (std::mem::take(&mut self.rows), self.last_row_sep);
        }
        let end = self.cell.span.end;
        self.end_cell(end);
        let row = std::mem::take(&mut self.row);
        let blank = self.rows.is_empty() && row.cells.len() == 1 && row.cells[0].items.is_empty();
        if !blank {
            self.rows.push(row);
        }
        (std::mem::take(&mut self.rows), None)
    }
}

/// Index of the token closing the group/option opened at `open`.
fn matching(tokens: &[Token], open: usize, opener: &TokenKind, closer: &TokenKind) -> Result<usize, SyntaxError> {
    let mut depth = 0usize;
    for (j, t) in tokens.iter().enumerate().skip(open) {
        if &t.kind == opener {
            depth += 1;
        } else if &t.kind == closer {
            depth -= 1;
            if depth == 0 {
                return Ok(j);
            }
        }
    }
    Err(match opener {
        TokenKind::OptionOpen => SyntaxError::UnterminatedOptionBlock(tokens[open].span.start),
        _ => SyntaxError::UnbalancedBraces(tokens[open].span.start),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names(cell: &CellSource) -> Vec<&str> {
        cell.items
            .iter()
            .filter_map(|i| match i {
                CellItem::Command(c) => Some(c.name.as_str()),
                _ => None,
            })
            .collect()
    }

    #[test]
    fn first_single_wire_listing() {
        let src = r"\begin{quantikz}
\lstick{\ket{0}} & \phase{\alpha} & \gate{H}
   & \phase{\beta} & \gate{H} & \phase{\gamma}
   & \rstick{Arbitrary\\pure state}\qw
\end{quantikz}";
        let m = parse_document(src).unwrap();
        assert_eq!(m.env_name, "quantikz");
        assert_eq!(m.rows.len(), 1);
        assert_eq!(m.rows[0].cells.len(), 7);
        assert_eq!(names(&m.rows[0].cells[6]), ["rstick", "qw"]);
        let CellItem::Command(rstick) = &m.rows[0].cells[6].items[0] else { panic!() };
        assert_eq!(rstick.braced_args, ["Arbitrary\\\\pure state"]);
    }

    #[test]
    fn column_extra_space_and_two_commands() {
        let src = r"\lstick{$\ket{0}^{\otimes n}$} &[2mm] \gate{H}\qwbundle{3} & \qw";
        let m = parse_document(src).unwrap();
        assert_eq!(m.col_extra_space.get(&0), Some(&Length::mm(2.0)));
        assert_eq!(m.col_extra_space.len(), 1);
        assert_eq!(names(&m.rows[0].cells[1]), ["gate", "qwbundle"]);
    }

    #[test]
    fn row_extra_space() {
        let m = parse_document(r"a \\[1cm] b").unwrap();
        assert_eq!(m.rows.len(), 2);
        assert_eq!(m.row_extra_space.get(&0), Some(&Length::cm(1.0)));
    }

    #[test]
    fn trailing_row_separator_is_recorded() {
        let m = parse_document("& \\qw \\\\\n& \\qw \\\\ % done\n").unwrap();
        assert_eq!(m.rows.len(), 2);
        assert!(m.trailing_row_separator.is_some());
        let m = parse_document("& \\qw \\\\\n& \\qw\n").unwrap();
        assert!(m.trailing_row_separator.is_none());
    }

    #[test]
    fn options_and_header_forms() {
        let m = parse_document("%!quantikz [slice all, row sep={0.6cm,between origins}]\n& \\qw").unwrap();
        assert_eq!(m.env_options_raw, "slice all, row sep={0.6cm,between origins}");
        let m = parse_document("\\begin{tikzcd}[column sep=1cm]\n& \\qw\n\\end{tikzcd}").unwrap();
        assert_eq!(m.env_name, "tikzcd");
        assert_eq!(m.env_options()[0].key, "column sep");
    }

    #[test]
    fn optional_and_braced_args() {
        let m = parse_document(r"\gate[wires=2][2cm]{U} & \makeebit[-60][blue]{test}").unwrap();
        let CellItem::Command(g) = &m.rows[0].cells[0].items[0] else { panic!() };
        assert_eq!(g.opt_args, ["wires=2", "2cm"]);
        assert_eq!(g.braced_args, ["U"]);
        let CellItem::Command(e) = &m.rows[0].cells[1].items[0] else { panic!() };
        assert_eq!(e.opt_args, ["-60", "blue"]);
    }

    #[test]
    fn free_text_runs() {
        let m = parse_document(r"& \ \ldots\ \qw & = &").unwrap();
        let cell = &m.rows[0].cells[1];
        assert_eq!(names(cell), ["ldots", "qw"]);
        assert!(matches!(&cell.items[0], CellItem::Text { content, .. } if content == "\\ "));
        assert!(matches!(&m.rows[0].cells[2].items[0], CellItem::Text { content, .. } if content == "="));
    }

    #[test]
    fn ampersand_replacement_document() {
        let src = "\\begin{quantikz}[ampersand replacement=\\&]\n\\lstick{$\\ket{0}$} \\& \\gate{\\left(\\begin{array}{cc} \\alpha & \\beta \\\\ \\beta & -\\alpha \\end{array}\\right)} \\& \\ctrl{1}\n\\end{quantikz}";
        let m = parse_document(src).unwrap();
        assert_eq!(m.rows.len(), 1);
        assert_eq!(m.rows[0].cells.len(), 3);
    }

    #[test]
    fn errors_carry_source_offsets() {
        let err = parse_document("\\begin{quantikz}\n\\gate{H\n\\end{quantikz}").unwrap_err();
        assert_eq!(err, SyntaxError::UnbalancedBraces(22));
        assert!(matches!(parse_document("\\begin{quantikz} & \\qw"), Err(SyntaxError::MissingEnd { .. })));
    }

    #[test]
    fn empty_document() {
        let m = parse_document("").unwrap();
        assert!(m.rows.is_empty());
    }

    proptest::proptest! {
        #[test]
        fn failures_are_positioned(src in r"[a-z \\&{}\[\]%|\n=,0-9.]{0,80}") {
            match parse_document(&src) {
                Ok(m) => {
                    let widths: Vec<usize> = m.rows.iter().map(|r| r.cells.len()).collect();
                    proptest::prop_assert!(widths.iter().all(|&w| w >= 1));
                }
                Err(e) => proptest::prop_assert!(e.position() <= src.len()),
            }
        }

        #[test]
        fn brace_free_input_always_parses(src in r"[a-z &%\n=,0-9.]{0,80}") {
            proptest::prop_assert!(parse_document(&src).is_ok());
        }
    }
}
