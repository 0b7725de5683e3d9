//! Source text to scene, one stage after another.

use std::fmt;

use crate::layout::{layout, GeometryConfig, LayoutDiagnostic, LayoutError, LayoutResult};
use crate::model::{lower, resolve, validate, Lint, ModelError, ResolvedCircuit};
use crate::render::{build_scene, Scene};
use crate::style::{StyleSheet, Styler};
use crate::syntax::{parse_document, SyntaxError};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CompileError {
    #[error(transparent)]
    Syntax(#[from] SyntaxError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Layout(#[from] LayoutError),
}

/// Where an error points: a place in the text or a grid cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Location {
    /// 1-based line and column in the source.
    Text {
        line: usize,
        col: usize,
    },
    /// 1-based grid row and column.
    Cell {
        row: usize,
        col: usize,
    },
    Whole,
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Location::Text { line, col } => write!(f, "{line}:{col}"),
            Location::Cell { row, col } => write!(f, "row {row}, column {col}"),
            Location::Whole => f.write_str("document"),
        }
    }
}

/// 1-based line and column (in characters) of a byte offset.
pub fn line_col(src: &str, pos: usize) -> (usize, usize) {
    let before = &src[..pos.min(src.len())];
    let line = before.matches('\n').count() + 1;
    let start = before.rfind('\n').map_or(0, |i| i + 1);
    (line, before[start..].chars().count() + 1)
}

impl CompileError {
    pub fn location(&self, src: &str) -> Location {
        let text = |pos| {
            let (line, col) = line_col(src, pos);
            Location::Text { line, col }
        };
        match self {
            CompileError::Syntax(e) => text(e.position()),
            CompileError::Model(e) => match (e.position(), e.cell()) {
                (Some(pos), _) => text(pos),
                (None, Some((r, c))) => Location::Cell { row: r + 1, col: c + 1 },
                _ => Location::Whole,
            },
            CompileError::Layout(_) => Location::Whole,
        }
    }
}

/// Parses, lowers, resolves and validates.
pub fn analyze(src: &str) -> Result<(ResolvedCircuit, Vec<Lint>), CompileError> {
    let matrix = parse_document(src)?;
    let (grid, env, _) = lower(&matrix)?;
    let rc = resolve(grid, env)?;
    let lints = validate(&rc);
    Ok((rc, lints))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Compiled {
    pub resolved: ResolvedCircuit,
    pub layout: LayoutResult,
    pub scene: Scene,
    pub lints: Vec<Lint>,
    pub notes: Vec<LayoutDiagnostic>,
}

/// Runs every stage up to the scene.
pub fn compile(src: &str, sheet: &StyleSheet) -> Result<Compiled, CompileError> {
    let (rc, lints) = analyze(src)?;
    let styler = Styler { sheet, env: &rc.env };
    let lay = layout(&rc, &styler, &GeometryConfig::from_env(&rc.env))?;
    let scene = build_scene(&rc, &lay, &styler);
    let notes = lay.diagnostics.clone();
    Ok(Compiled { resolved: rc, layout: lay, scene, lints, notes })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn line_columns() {
        assert_eq!(line_col("ab\ncd", 0), (1, 1));
        assert_eq!(line_col("ab\ncd", 4), (2, 2));
        assert_eq!(line_col("é\nx", 3), (2, 1));
    }

    #[test]
    fn errors_are_located() {
        let src = "\\ctrl{9} & \\qw \\\\\n\\qw & \\qw";
        let err = compile(src, &StyleSheet::default()).unwrap_err();
        assert_eq!(err.location(src), Location::Cell { row: 1, col: 1 });
        let src = "\\gate{H} & \\frob{x}";
        let err = compile(src, &StyleSheet::default()).unwrap_err();
        assert_eq!(err.location(src), Location::Text { line: 1, col: 12 });
    }
}
