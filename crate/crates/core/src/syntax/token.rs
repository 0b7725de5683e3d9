use super::{Length, Span, SyntaxError};

#[derive(Debug, Clone, PartialEq)]
pub enum TokenKind {
    /// A control word such as `\gate`; the name excludes the backslash.
    Command(String),
    BeginGroup,
    EndGroup,
    CellSeparator,
    /// `\\`, optionally followed by `[len]` extra row space.
    RowSeparator(Option<Length>),
    OptionOpen,
    OptionClose,
    Text(String),
    /// `|[...]|` at the start of a cell; holds the bracket contents.
    InlineNodeStyle(String),
    Whitespace,
    /// `%` up to (not including) the end of the line.
    Comment,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Token {
    pub kind: TokenKind,
    pub span: Span,
}

impl Token {
    pub fn is_trivia(&self) -> bool {
        matches!(self.kind, TokenKind::Whitespace | TokenKind::Comment)
    }
}

/// What the last significant token was, for deciding whether `[` opens an
/// option block.
#[derive(Debug, Clone, Copy, PartialEq)]
enum Prev {
    Start,
    Command,
    OptionClose,
    CellSeparator,
    RowSeparator,
    BeginEnvGroup,
    Other,
}

struct Lexer<'a> {
    src: &'a str,
    pos: usize,
    ampersand_replacement: bool,
    tokens: Vec<Token>,
    /// Byte offsets of unmatched `{`.
    groups: Vec<usize>,
    /// (brace depth at open, byte offset) of open option blocks.
    options: Vec<(usize, usize)>,
    prev: Prev,
    trivia_since_prev: bool,
    /// Brace depth at which a `\begin{...}` name group was opened.
    begin_group: Option<usize>,
    pending_begin: bool,
}

/// Splits quantikz source into tokens. Spans tile the input exactly, so
/// concatenating them reproduces `source` byte for byte.
///
/// With `ampersand_replacement`, `\&` separates cells and a bare `&` is text.
/// Separators only count at brace depth zero outside option blocks; inside
/// groups they are text, which keeps labels like `\begin{array}` intact.
pub fn tokenize(source: &str, ampersand_replacement: bool) -> Result<Vec<Token>, SyntaxError> {
    let mut lx = Lexer {
        src: source,
        pos: 0,
        ampersand_replacement,
        tokens: Vec::new(),
        groups: Vec::new(),
        options: Vec::new(),
        prev: Prev::Start,
        trivia_since_prev: false,
        begin_group: None,
        pending_begin: false,
    };
    lx.run()?;
    Ok(lx.tokens)
}

impl<'a> Lexer<'a> {
    fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn peek_at(&self, offset: usize) -> Option<char> {
        self.src.get(self.pos + offset..).and_then(|s| s.chars().next())
    }

    fn at_top(&self) -> bool {
        self.groups.is_empty() && self.options.is_empty()
    }

    fn push(&mut self, kind: TokenKind, start: usize) {
        let trivia = matches!(kind, TokenKind::Whitespace | TokenKind::Comment);
        if trivia {
            self.trivia_since_prev = true;
        } else {
            self.prev = match &kind {
                TokenKind::Command(_) => Prev::Command,
                TokenKind::OptionClose => Prev::OptionClose,
                TokenKind::CellSeparator => Prev::CellSeparator,
                TokenKind::RowSeparator(_) => Prev::RowSeparator,
                _ => Prev::Other,
            };
            self.trivia_since_prev = false;
        }
        self.tokens.push(Token { kind, span: Span::new(start, self.pos) });
    }

    fn option_allowed(&self) -> bool {
        if !self.at_top() {
            return false;
        }
        match self.prev {
            Prev::Command | Prev::OptionClose | Prev::BeginEnvGroup => true,
            Prev::CellSeparator => !self.trivia_since_prev,
            _ => false,
        }
    }

    fn at_cell_start(&self) -> bool {
        self.at_top() && matches!(self.prev, Prev::Start | Prev::CellSeparator | Prev::RowSeparator)
    }

    fn run(&mut self) -> Result<(), SyntaxError> {
        while let Some(c) = self.peek() {
            let start = self.pos;
            match c {
                '%' => {
                    let end = self.src[start..].find('\n').map(|i| start + i).unwrap_or(self.src.len());
                    self.pos = end;
                    self.push(TokenKind::Comment, start);
                }
                c if c.is_whitespace() => {
                    let end = self.src[start..]
                        .char_indices()
                        .find(|(_, c)| !c.is_whitespace())
                        .map(|(i, _)| start + i)
                        .unwrap_or(self.src.len());
                    self.pos = end;
                    self.push(TokenKind::Whitespace, start);
                }
                '{' => {
                    self.pos += 1;
                    if self.pending_begin {
                        self.begin_group = Some(self.groups.len());
                    }
                    self.pending_begin = false;
                    self.groups.push(start);
                    self.push(TokenKind::BeginGroup, start);
                }
                '}' => {
                    let Some(_) = self.groups.pop() else {
                        return Err(SyntaxError::UnbalancedBraces(start));
                    };
                    if let Some(&(depth, open)) = self.options.last() {
                        if self.groups.len() < depth {
                            return Err(SyntaxError::UnterminatedOptionBlock(open));
                        }
                    }
                    self.pos += 1;
                    self.push(TokenKind::EndGroup, start);
                    if self.begin_group == Some(self.groups.len()) {
                        self.begin_group = None;
                        self.prev = Prev::BeginEnvGroup;
                    }
                }
                '[' if self.option_allowed() => {
                    self.pos += 1;
                    self.options.push((self.groups.len(), start));
                    self.push(TokenKind::OptionOpen, start);
                }
                ']' if matches!(self.options.last(), Some(&(d, _)) if d == self.groups.len()) => {
                    self.pos += 1;
                    self.options.pop();
                    self.push(TokenKind::OptionClose, start);
                }
                '&' => {
                    self.pos += 1;
                    if self.at_top() && !self.ampersand_replacement {
                        self.push(TokenKind::CellSeparator, start);
                    } else {
                        self.push(TokenKind::Text("&".into()), start);
                    }
                }
                '|' if self.peek_at(1) == Some('[') && self.at_cell_start() => self.inline_node_style(start)?,
                '\\' => self.control_sequence(start)?,
                _ => {
                    let end = self.src[start..]
                        .char_indices()
                        .find(|&(_, c)| {
                            c.is_whitespace() || matches!(c, '%' | '{' | '}' | '[' | ']' | '&' | '\\' | '|')
                        })
                        .map(|(i, _)| start + i)
                        .unwrap_or(self.src.len());
                    // a lone delimiter that did not take one of the branches above
                    self.pos = if end == start { start + c.len_utf8() } else { end };
                    let text = self.src[start..self.pos].to_string();
                    self.push(TokenKind::Text(text), start);
                }
            }
        }
        let group = self.groups.last().copied();
        let option = self.options.last().map(|&(_, p)| p);
        match (group, option) {
            (Some(g), Some(o)) if o > g => Err(SyntaxError::UnterminatedOptionBlock(o)),
            (Some(g), _) => Err(SyntaxError::UnbalancedBraces(g)),
            (None, Some(o)) => Err(SyntaxError::UnterminatedOptionBlock(o)),
            (None, None) => Ok(()),
        }
    }

    fn control_sequence(&mut self, start: usize) -> Result<(), SyntaxError> {
        match self.peek_at(1) {
            Some(c) if c.is_ascii_alphabetic() => {
                let name_end = self.src[start + 1..]
                    .char_indices()
                    .find(|(_, c)| !c.is_ascii_alphabetic())
                    .map(|(i, _)| start + 1 + i)
                    .unwrap_or(self.src.len());
                let name = self.src[start + 1..name_end].to_string();
                self.pos = name_end;
                self.pending_begin = name == "begin";
                self.push(TokenKind::Command(name), start);
            }
            Some('\\') => {
                self.pos += 2;
                if !self.at_top() {
                    self.push(TokenKind::Text("\\\\".into()), start);
                    return Ok(());
                }
                let mut extra = None;
                if self.peek() == Some('[') {
                    let Some(close) = self.src[self.pos..].find(']') else {
                        return Err(SyntaxError::UnterminatedOptionBlock(self.pos));
                    };
                    let text = &self.src[self.pos + 1..self.pos + close];
                    let len = text
                        .parse::<Length>()
                        .map_err(|_| SyntaxError::BadLength { text: text.to_string(), pos: self.pos + 1 })?;
                    extra = Some(len);
                    self.pos += close + 1;
                }
                self.push(TokenKind::RowSeparator(extra), start);
            }
            Some('&') => {
                self.pos += 2;
                if self.ampersand_replacement && self.at_top() {
                    self.push(TokenKind::CellSeparator, start);
                } else {
                    self.push(TokenKind::Text("\\&".into()), start);
                }
            }
            // control space
            Some(c) if c.is_whitespace() => {
                self.pos += 1 + c.len_utf8();
                self.push(TokenKind::Text(self.src[start..self.pos].to_string()), start);
            }
            _ => return Err(SyntaxError::InvalidControlSymbol(start)),
        }
        Ok(())
    }

    fn inline_node_style(&mut self, start: usize) -> Result<(), SyntaxError> {
        let body_start = start + 2;
        let mut depth = 0usize;
        for (i, c) in self.src[body_start..].char_indices() {
            match c {
                '{' => depth += 1,
                '}' => depth = depth.saturating_sub(1),
                ']' if depth == 0 && self.src[body_start + i + 1..].starts_with('|') => {
                    let raw = self.src[body_start..body_start + i].to_string();
                    self.pos = body_start + i + 2;
                    self.push(TokenKind::InlineNodeStyle(raw), start);
                    return Ok(());
                }
                _ => {}
            }
        }
        Err(SyntaxError::UnterminatedOptionBlock(start))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn significant(src: &str, amp: bool) -> Vec<TokenKind> {
        tokenize(src, amp).unwrap().into_iter().filter(|t| !t.is_trivia()).map(|t| t.kind).collect()
    }

    #[test]
    fn gate_then_wire() {
        use TokenKind::*;
        assert_eq!(
            significant(r"\gate{H} & \qw", false),
            vec![Command("gate".into()), BeginGroup, Text("H".into()), EndGroup, CellSeparator, Command("qw".into())]
        );
    }

    #[test]
    fn empty_input() {
        assert!(tokenize("", false).unwrap().is_empty());
    }

    #[test]
    fn ampersand_replacement_keeps_inner_ampersand() {
        let src = r"\gate{\left(\begin{array}{cc} \alpha & \beta \end{array}\right)} \& \ctrl{1}";
        let kinds = significant(src, true);
        let seps = kinds.iter().filter(|k| **k == TokenKind::CellSeparator).count();
        assert_eq!(seps, 1);
        assert!(kinds.contains(&TokenKind::Text("&".into())));
    }

    #[test]
    fn bare_ampersand_is_text_under_replacement() {
        let kinds = significant("a & b", true);
        assert!(!kinds.contains(&TokenKind::CellSeparator));
    }

    #[test]
    fn row_separator_with_length() {
        let kinds = significant(r"a \\[1cm] b", false);
        assert!(kinds.contains(&TokenKind::RowSeparator(Some(Length::cm(1.0)))));
    }

    #[test]
    fn double_backslash_inside_group_is_text() {
        let kinds = significant(r"\rstick{Arbitrary\\pure state}", false);
        assert!(!kinds.iter().any(|k| matches!(k, TokenKind::RowSeparator(_))));
    }

    #[test]
    fn options_only_after_commands() {
        use TokenKind::*;
        let kinds = significant(r"\gate[wires=2][2cm]{U}", false);
        assert_eq!(kinds.iter().filter(|k| **k == OptionOpen).count(), 2);
        let kinds = significant(r"\gate{[0,1)}", false);
        assert!(!kinds.contains(&OptionOpen));
        let kinds = significant(r"&[2mm] \gate{H}", false);
        assert_eq!(kinds[1], OptionOpen);
    }

    #[test]
    fn comments_and_inline_style() {
        let toks = tokenize("& |[linecont, inner ysep=3pt]| & % note\n\\qw", false).unwrap();
        assert!(toks.iter().any(|t| t.kind == TokenKind::InlineNodeStyle("linecont, inner ysep=3pt".into())));
        assert!(toks.iter().any(|t| t.kind == TokenKind::Comment));
    }

    #[test]
    fn errors_are_positioned() {
        assert_eq!(tokenize(r"\gate{H", false), Err(SyntaxError::UnbalancedBraces(5)));
        assert_eq!(tokenize(r"a}", false), Err(SyntaxError::UnbalancedBraces(1)));
        assert_eq!(tokenize(r"\gate[wires=2{U}", false), Err(SyntaxError::UnterminatedOptionBlock(5)));
        assert_eq!(tokenize(r"\gate{\,}", false), Err(SyntaxError::InvalidControlSymbol(6)));
    }

    #[test]
    fn control_space_is_text() {
        let kinds = significant(r"\ \ldots\ \qw", false);
        assert_eq!(kinds[0], TokenKind::Text("\\ ".into()));
    }

    proptest! {
        #[test]
        fn spans_tile_the_source(src in r"[a-z \\&{}\[\]%|\n$^_=,0-9.]{0,60}", amp in any::<bool>()) {
            if let Ok(tokens) = tokenize(&src, amp) {
                let mut cursor = 0;
                let mut rebuilt = String::new();
                for t in &tokens {
                    prop_assert_eq!(t.span.start, cursor);
                    prop_assert!(t.span.end > t.span.start);
                    rebuilt.push_str(&src[t.span.start..t.span.end]);
                    cursor = t.span.end;
                    if let TokenKind::Command(name) = &t.kind {
                        prop_assert!(name.chars().all(|c| c.is_ascii_alphabetic()));
                    }
                }
                prop_assert_eq!(rebuilt, src);
            }
        }
    }
}
