//! Label markup. Labels are not typeset; a small subset of math notation is
//! turned into styled text runs.

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Script {
    Normal,
    Sup,
    Sub,
}

impl Script {
    pub fn name(self) -> &'static str {
        match self {
            Script::Normal => "normal",
            Script::Sup => "sup",
            Script::Sub => "sub",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Run {
    pub text: String,
    pub script: Script,
}

pub type Line = Vec<Run>;

/// Commands whose argument is drawn as plain text.
const WRAPPERS: &[&str] = &[
    "text",
    "textrm",
    "textbf",
    "textit",
    "textsf",
    "texttt",
    "textsc",
    "textnormal",
    "mathrm",
    "mathbf",
    "mathit",
    "mathsf",
    "mathtt",
    "mathcal",
    "mathbb",
    "mathfrak",
    "mbox",
    "hbox",
    "emph",
    "operatorname",
    "boldsymbol",
    "bm",
];

/// Commands that only change font or size; they draw nothing.
const IGNORED: &[&str] = &[
    "sc",
    "bf",
    "it",
    "rm",
    "tt",
    "sf",
    "em",
    "tiny",
    "scriptsize",
    "footnotesize",
    "small",
    "normalsize",
    "large",
    "Large",
    "LARGE",
    "huge",
    "Huge",
    "displaystyle",
    "textstyle",
    "scriptstyle",
    "left",
    "right",
    "big",
    "Big",
    "bigg",
    "Bigg",
    "bigl",
    "bigr",
    "Bigl",
    "Bigr",
    "biggl",
    "biggr",
    "hline",
    "nonumber",
    "mathstrut",
    "strut",
    "centering",
    "relax",
    "protect",
    "limits",
    "nolimits",
];

const SYMBOLS: &[(&str, &str)] = &[
    ("alpha", "α"),
    ("beta", "β"),
    ("gamma", "γ"),
    ("delta", "δ"),
    ("epsilon", "ϵ"),
    ("varepsilon", "ε"),
    ("zeta", "ζ"),
    ("eta", "η"),
    ("theta", "θ"),
    ("vartheta", "ϑ"),
    ("iota", "ι"),
    ("kappa", "κ"),
    ("lambda", "λ"),
    ("mu", "μ"),
    ("nu", "ν"),
    ("xi", "ξ"),
    ("pi", "π"),
    ("varpi", "ϖ"),
    ("rho", "ρ"),
    ("varrho", "ϱ"),
    ("sigma", "σ"),
    ("varsigma", "ς"),
    ("tau", "τ"),
    ("upsilon", "υ"),
    ("phi", "ϕ"),
    ("varphi", "φ"),
    ("chi", "χ"),
    ("psi", "ψ"),
    ("omega", "ω"),
    ("Gamma", "Γ"),
    ("Delta", "Δ"),
    ("Theta", "Θ"),
    ("Lambda", "Λ"),
    ("Xi", "Ξ"),
    ("Pi", "Π"),
    ("Sigma", "Σ"),
    ("Upsilon", "Υ"),
    ("Phi", "Φ"),
    ("Psi", "Ψ"),
    ("Omega", "Ω"),
    ("otimes", "⊗"),
    ("oplus", "⊕"),
    ("ominus", "⊖"),
    ("odot", "⊙"),
    ("oslash", "⊘"),
    ("times", "×"),
    ("cdot", "·"),
    ("pm", "±"),
    ("mp", "∓"),
    ("dagger", "†"),
    ("dag", "†"),
    ("ldots", "…"),
    ("dots", "…"),
    ("cdots", "⋯"),
    ("vdots", "⋮"),
    ("ddots", "⋱"),
    ("langle", "⟨"),
    ("rangle", "⟩"),
    ("lvert", "|"),
    ("rvert", "|"),
    ("vert", "|"),
    ("mid", "|"),
    ("Vert", "‖"),
    ("lceil", "⌈"),
    ("rceil", "⌉"),
    ("lfloor", "⌊"),
    ("rfloor", "⌋"),
    ("to", "→"),
    ("rightarrow", "→"),
    ("leftarrow", "←"),
    ("leftrightarrow", "↔"),
    ("Rightarrow", "⇒"),
    ("Leftarrow", "⇐"),
    ("mapsto", "↦"),
    ("uparrow", "↑"),
    ("downarrow", "↓"),
    ("infty", "∞"),
    ("le", "≤"),
    ("leq", "≤"),
    ("ge", "≥"),
    ("geq", "≥"),
    ("neq", "≠"),
    ("ne", "≠"),
    ("approx", "≈"),
    ("equiv", "≡"),
    ("sim", "∼"),
    ("propto", "∝"),
    ("partial", "∂"),
    ("nabla", "∇"),
    ("hbar", "ℏ"),
    ("ell", "ℓ"),
    ("star", "⋆"),
    ("ast", "∗"),
    ("circ", "∘"),
    ("bullet", "•"),
    ("prime", "′"),
    ("sum", "∑"),
    ("prod", "∏"),
    ("int", "∫"),
    ("in", "∈"),
    ("notin", "∉"),
    ("neg", "¬"),
    ("lnot", "¬"),
    ("wedge", "∧"),
    ("land", "∧"),
    ("vee", "∨"),
    ("lor", "∨"),
    ("cup", "∪"),
    ("cap", "∩"),
    ("emptyset", "∅"),
    ("forall", "∀"),
    ("exists", "∃"),
    ("quad", "  "),
    ("qquad", "    "),
    ("sin", "sin"),
    ("cos", "cos"),
    ("tan", "tan"),
    ("exp", "exp"),
    ("log", "log"),
    ("ln", "ln"),
    ("det", "det"),
    ("max", "max"),
    ("min", "min"),
    ("Tr", "Tr"),
];

struct Builder {
    lines: Vec<Line>,
}

impl Builder {
    fn push(&mut self, text: &str, script: Script) {
        let line = self.lines.last_mut().expect("at least one line");
        match line.last_mut() {
            Some(run) if run.script == script => run.text.push_str(text),
            _ => line.push(Run { text: text.to_string(), script }),
        }
    }

    fn newline(&mut self) {
        self.lines.push(Vec::new());
    }
}

struct Parser<'a> {
    chars: Vec<char>,
    pos: usize,
    out: &'a mut Builder,
}

impl Parser<'_> {
    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn skip_spaces(&mut self) {
        while self.peek().is_some_and(char::is_whitespace) {
            self.pos += 1;
        }
    }

    /// Raw text of the next `{..}` group, or of the next single character.
    fn raw_arg(&mut self) -> String {
        self.skip_spaces();
        match self.peek() {
            Some('{') => {
                let start = self.pos + 1;
                let mut depth = 0;
                while let Some(c) = self.peek() {
                    self.pos += 1;
                    match c {
                        '{' => depth += 1,
                        '}' => {
                            depth -= 1;
                            if depth == 0 {
                                return self.chars[start..self.pos - 1].iter().collect();
                            }
                        }
                        '\\' => self.pos += 1,
                        _ => {}
                    }
                }
                self.chars[start.min(self.chars.len())..].iter().collect()
            }
            Some('\\') => {
                let start = self.pos;
                self.pos += 1;
                while self.peek().is_some_and(|c| c.is_ascii_alphabetic()) {
                    self.pos += 1;
                }
                if self.pos == start + 1 {
                    self.pos += 1;
                }
                self.chars[start..self.pos.min(self.chars.len())].iter().collect()
            }
            Some(c) => {
                self.pos += 1;
                c.to_string()
            }
            None => String::new(),
        }
    }

    fn optional_arg(&mut self) -> Option<String> {
        let save = self.pos;
        self.skip_spaces();
        if self.peek() != Some('[') {
            self.pos = save;
            return None;
        }
        let start = self.pos + 1;
        while let Some(c) = self.peek() {
            self.pos += 1;
            if c == ']' {
                return Some(self.chars[start..self.pos - 1].iter().collect());
            }
        }
        Some(String::new())
    }

    fn nested(&mut self, src: &str, script: Script) {
        let mut p = Parser { chars: src.chars().collect(), pos: 0, out: self.out };
        p.run(script);
    }

    fn command(&mut self, script: Script) {
        let start = self.pos;
        while self.peek().is_some_and(|c| c.is_ascii_alphabetic()) {
            self.pos += 1;
        }
        if self.pos == start {
            let Some(c) = self.peek() else { return };
            self.pos += 1;
            match c {
                '\\' => self.out.newline(),
                ' ' | ',' | ';' | ':' => self.out.push(" ", script),
                '!' | '/' => {}
                _ => self.out.push(&c.to_string(), script),
            }
            return;
        }
        let name: String = self.chars[start..self.pos].iter().collect();
        let name = name.as_str();
        if WRAPPERS.contains(&name) {
            let arg = self.raw_arg();
            self.nested(&arg, script);
            return;
        }
        self.skip_spaces();
        if IGNORED.contains(&name) {
            return;
        }
        if let Some((_, sym)) = SYMBOLS.iter().find(|(n, _)| *n == name) {
            self.out.push(sym, script);
            return;
        }
        match name {
            "ket" | "bra" => {
                let arg = self.raw_arg();
                self.out.push(if name == "ket" { "|" } else { "⟨" }, script);
                self.nested(&arg, script);
                self.out.push(if name == "ket" { "⟩" } else { "|" }, script);
            }
            "braket" => {
                let (a, b) = (self.raw_arg(), self.raw_arg());
                self.out.push("⟨", script);
                self.nested(&a, script);
                self.out.push("|", script);
                self.nested(&b, script);
                self.out.push("⟩", script);
            }
            "sqrt" => {
                self.optional_arg();
                let arg = self.raw_arg();
                self.out.push("√", script);
                self.nested(&arg, script);
            }
            "frac" | "dfrac" | "tfrac" => {
                let (a, b) = (self.raw_arg(), self.raw_arg());
                self.nested(&a, script);
                self.out.push("/", script);
                self.nested(&b, script);
            }
            "begin" => {
                let env = self.raw_arg();
                if matches!(env.as_str(), "array" | "tabular") {
                    self.raw_arg();
                }
            }
            "end" => {
                self.raw_arg();
            }
            _ => self.out.push(&format!("\\{name}"), script),
        }
    }

    fn run(&mut self, script: Script) {
        while let Some(c) = self.peek() {
            self.pos += 1;
            match c {
                '$' | '}' | '&' => {}
                '{' => {
                    self.pos -= 1;
                    let group = self.raw_arg();
                    self.nested(&group, script);
                }
                '^' | '_' => {
                    let inner = match (script, c) {
                        (Script::Normal, '^') => Script::Sup,
                        (Script::Normal, _) => Script::Sub,
                        (s, _) => s,
                    };
                    let arg = self.raw_arg();
                    self.nested(&arg, inner);
                }
                '~' => self.out.push(" ", script),
                '\\' => self.command(script),
                c if c.is_whitespace() => self.out.push(" ", script),
                c => self.out.push(&c.to_string(), script),
            }
        }
    }
}

fn tidy(line: Line) -> Line {
    let mut out: Line = Vec::new();
    for mut run in line {
        let mut collapsed = String::with_capacity(run.text.len());
        let mut prev_space = out.last().is_some_and(|r| r.text.ends_with(' '));
        for c in run.text.chars() {
            if c == ' ' {
                if !prev_space {
                    collapsed.push(' ');
                }
                prev_space = true;
            } else {
                collapsed.push(c);
                prev_space = false;
            }
        }
        run.text = collapsed;
        if !run.text.is_empty() {
            out.push(run);
        }
    }
    if let Some(first) = out.first_mut() {
        first.text = first.text.trim_start().to_string();
    }
    if let Some(last) = out.last_mut() {
        last.text = last.text.trim_end().to_string();
    }
    out.retain(|r| !r.text.is_empty());
    out
}

/// Splits a label into lines of styled runs.
pub fn parse_label(src: &str) -> Vec<Line> {
    let mut b = Builder { lines: vec![Vec::new()] };
    Parser { chars: src.chars().collect(), pos: 0, out: &mut b }.run(Script::Normal);
    let mut lines: Vec<Line> = b.lines.into_iter().map(tidy).collect();
    // blank rows left by `\\` around environments
    while lines.len() > 1 && lines.last().is_some_and(Vec::is_empty) {
        lines.pop();
    }
    while lines.len() > 1 && lines.first().is_some_and(Vec::is_empty) {
        lines.remove(0);
    }
    if lines.iter().all(Vec::is_empty) {
        return Vec::new();
    }
    lines
}

/// The label as plain text, lines joined by newlines.
pub fn plain_text(src: &str) -> String {
    parse_label(src)
        .iter()
        .map(|l| l.iter().map(|r| r.text.as_str()).collect::<String>())
        .collect::<Vec<_>>()
        .join("\n")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn runs(src: &str) -> Vec<(String, Script)> {
        parse_label(src).concat().into_iter().map(|r| (r.text, r.script)).collect()
    }

    #[test]
    fn ket_and_superscript() {
        assert_eq!(
            runs(r"$\ket{0}^{\otimes n}$"),
            [("|0⟩".to_string(), Script::Normal), ("⊗n".to_string(), Script::Sup)]
        );
        assert_eq!(plain_text(r"\bra{\psi}"), "⟨ψ|");
    }

    #[test]
    fn wrappers_are_stripped() {
        assert_eq!(plain_text(r"\text{trash}"), "trash");
        assert_eq!(plain_text(r"{\sc Measure}"), "Measure");
        assert_eq!(plain_text(r"$U_x$"), "Ux");
        assert_eq!(runs(r"$U_x$")[1], ("x".to_string(), Script::Sub));
    }

    #[test]
    fn lines_and_arrays() {
        assert_eq!(plain_text(r"Arbitrary\\pure state"), "Arbitrary\npure state");
        let src = r"\begin{array}{c} \text{M} \\ \text{A} \\ \text{J} \end{array}";
        assert_eq!(plain_text(src), "M\nA\nJ");
    }

    #[test]
    fn symbols_and_unknown_commands() {
        assert_eq!(plain_text(r"$y\oplus f(x)$"), "y⊕f(x)");
        assert_eq!(plain_text(r"\ \ldots\ "), "…");
        assert_eq!(plain_text(r"\frac{\pi}{2}"), "π/2");
        assert_eq!(plain_text(r"\foo{x}"), r"\foox");
        assert!(parse_label("").is_empty());
        assert!(parse_label("  $ $ ").is_empty());
    }
}
