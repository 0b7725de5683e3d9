//! Typed circuit model: lowering the untyped matrix into elements on a
//! rectangular grid, then resolving links, wire kinds, slices and groups.

mod env;
mod lint;
mod lower;
mod resolve;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;

pub use env::{parse_env_options, EnvOptions, DEFAULT_COLUMN_SEP, DEFAULT_ROW_SEP};
pub use lint::validate;
pub use lower::{is_known_command, lower};
pub use resolve::resolve;

use crate::syntax::Length;

#[derive(Debug, Clone, PartialEq)]
pub struct PortLabel {
    pub label: String,
    /// Wire of the gate the label starts on, 0 being the gate's own row.
    pub row_offset: usize,
    pub wires: usize,
    pub label_style: String,
    pub brace_style: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StickSide {
    Left,
    Right,
    Mid,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Brackets {
    None,
    Left,
    Right,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeterVariant {
    /// `\meter`
    Box,
    /// `\meterD`
    D,
    /// `\measuretab`
    Tab,
    /// `\measure`
    Rounded,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhantomKind {
    /// `\hphantom`: widens the gate in the same cell.
    BoxWidener,
    /// `\hphantomgate`: lengthens the wire.
    WireLengthener,
    /// `\ghost`: height only.
    Ghost,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Bundle {
    /// Strike label, e.g. `3`; empty for none.
    pub count: String,
    pub alternate: bool,
    /// `alternate=2`: two lines instead of three.
    pub alt2: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum WireKind {
    Quantum,
    Classical,
    Bundle(Bundle),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VerticalKind {
    Quantum,
    Classical,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Element {
    Gate {
        label: String,
        wires: usize,
        min_width: Option<Length>,
        /// Label whose gate height every spanned row is floored at (`U` by default).
        height_label: Option<String>,
        disable_auto_height: bool,
        swap_variant: bool,
        cwires: BTreeSet<usize>,
        nwires: BTreeSet<usize>,
        bundle: BTreeSet<usize>,
        style: String,
        label_style: String,
        inputs: Vec<PortLabel>,
        outputs: Vec<PortLabel>,
    },
    Stick {
        side: StickSide,
        label: String,
        wires: usize,
        brackets: Brackets,
        label_style: String,
        brace_style: String,
    },
    PhaseDot {
        phase_label: String,
        open: bool,
        style: String,
        label_position: String,
    },
    CtrlLine {
        offset: i64,
        open: bool,
        bundle: bool,
        bundle_wires: Option<u32>,
    },
    SwapCross {
        offset: Option<i64>,
        style: String,
    },
    TargCircle {
        style: String,
    },
    Meter {
        variant: MeterVariant,
        basis_label: String,
        style: String,
    },
    Trash {
        label: String,
        style: String,
    },
    Push {
        content: String,
    },
    Phantom {
        kind: PhantomKind,
        content: String,
    },
    WireStub {
        kind: WireKind,
    },
    VerticalWire {
        offset: i64,
        kind: VerticalKind,
    },
    ClassicalBend {
        offset: i64,
    },
    Wave {
        style: String,
    },
    Ebit {
        angle_deg: f64,
        label: String,
        label_style: String,
    },
    ArrowMark {
        dirs: Vec<Dir>,
        style: String,
    },
    Empty,
}

impl Element {
    pub fn is_empty(&self) -> bool {
        matches!(self, Element::Empty)
    }

    pub fn variant_name(&self) -> &'static str {
        match self {
            Element::Gate { .. } => "Gate",
            Element::Stick { .. } => "Stick",
            Element::PhaseDot { .. } => "PhaseDot",
            Element::CtrlLine { .. } => "CtrlLine",
            Element::SwapCross { .. } => "SwapCross",
            Element::TargCircle { .. } => "TargCircle",
            Element::Meter { .. } => "Meter",
            Element::Trash { .. } => "Trash",
            Element::Push { .. } => "Push",
            Element::Phantom { .. } => "Phantom",
            Element::WireStub { .. } => "WireStub",
            Element::VerticalWire { .. } => "VerticalWire",
            Element::ClassicalBend { .. } => "ClassicalBend",
            Element::Wave { .. } => "Wave",
            Element::Ebit { .. } => "Ebit",
            Element::ArrowMark { .. } => "ArrowMark",
            Element::Empty => "Empty",
        }
    }

    pub const VARIANT_NAMES: [&'static str; 17] = [
        "Gate",
        "Stick",
        "PhaseDot",
        "CtrlLine",
        "SwapCross",
        "TargCircle",
        "Meter",
        "Trash",
        "Push",
        "Phantom",
        "WireStub",
        "VerticalWire",
        "ClassicalBend",
        "Wave",
        "Ebit",
        "ArrowMark",
        "Empty",
    ];
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dir {
    Up,
    Down,
    Left,
    Right,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SliceMark {
    pub title: String,
    pub style: String,
    pub label_style: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GateGroup {
    pub wires: usize,
    pub steps: usize,
    pub label: String,
    pub style: String,
    pub label_style: String,
    pub background: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Attachment {
    Slice(SliceMark),
    Group(GateGroup),
    /// Secondary element in the cell: wire stubs, vertical wires, arrows, phantoms.
    Extra(Element),
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellModel {
    pub element: Element,
    pub attachments: Vec<Attachment>,
    /// Host cell of the multi-wire gate spanning this one.
    pub covered_by: Option<(usize, usize)>,
    /// Byte offset of the cell in the source.
    pub pos: usize,
}

impl CellModel {
    pub fn empty(pos: usize) -> Self {
        CellModel { element: Element::Empty, attachments: Vec::new(), covered_by: None, pos }
    }

    pub fn extras(&self) -> impl Iterator<Item = &Element> {
        self.attachments.iter().filter_map(|a| match a {
            Attachment::Extra(e) => Some(e),
            _ => None,
        })
    }

    /// The primary element followed by all extra elements.
    pub fn elements(&self) -> impl Iterator<Item = &Element> {
        std::iter::once(&self.element).chain(self.extras())
    }

    /// An explicit `\qw`/`\cw`/`\qwbundle` in the cell.
    pub fn stub(&self) -> Option<&WireKind> {
        self.elements().find_map(|e| match e {
            Element::WireStub { kind } => Some(kind),
            _ => None,
        })
    }
}

/// Rectangular grid produced by [`lower`].
#[derive(Debug, Clone, PartialEq)]
pub struct CircuitGrid {
    pub cells: Vec<Vec<CellModel>>,
    /// Cell counts of the rows as written, before padding.
    pub raw_widths: Vec<usize>,
    pub col_extra_space: BTreeMap<usize, Length>,
    pub row_extra_space: BTreeMap<usize, Length>,
    /// Findings made while lowering (L1, L2, L3, L6, L7).
    pub lints: Vec<Lint>,
}

impl CircuitGrid {
    pub fn rows(&self) -> usize {
        self.cells.len()
    }

    pub fn cols(&self) -> usize {
        self.cells.first().map_or(0, Vec::len)
    }

    pub fn cell(&self, r: usize, c: usize) -> &CellModel {
        &self.cells[r][c]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Endpoint {
    Dot,
    OpenDot,
    Targ,
    Cross,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LinkKind {
    Quantum,
    Classical,
    Bend,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerticalLink {
    pub col: usize,
    pub from_row: usize,
    pub to_row: usize,
    pub kind: LinkKind,
    /// Glyphs at `from_row` and `to_row`.
    pub endpoints: (Endpoint, Endpoint),
    pub bundle: bool,
    pub bundle_wires: Option<u32>,
    /// True for `\swap`/`\targX` pairs.
    pub swap: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SegmentKind {
    Quantum,
    Classical,
    Bundle(Bundle),
    None,
}

impl From<&WireKind> for SegmentKind {
    fn from(k: &WireKind) -> Self {
        match k {
            WireKind::Quantum => SegmentKind::Quantum,
            WireKind::Classical => SegmentKind::Classical,
            WireKind::Bundle(b) => SegmentKind::Bundle(b.clone()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SlicePlacement {
    pub after_col: usize,
    pub title: String,
    pub style: String,
    pub label_style: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroupPlacement {
    pub row: usize,
    pub col: usize,
    pub group: GateGroup,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ArrowPlacement {
    pub from: (usize, usize),
    pub to: (usize, usize),
    pub style: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResolvedCircuit {
    pub grid: CircuitGrid,
    pub env: EnvOptions,
    pub links: Vec<VerticalLink>,
    /// Keyed by (row, gap); gap `g` joins columns `g` and `g + 1`.
    pub wire_segments: BTreeMap<(usize, usize), SegmentKind>,
    pub slices: Vec<SlicePlacement>,
    pub groups: Vec<GroupPlacement>,
    pub arrows: Vec<ArrowPlacement>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ModelError {
    #[error("unknown command \\{name}")]
    UnknownCommand { name: String, pos: usize },
    #[error("\\{command}: unsupported option `{key}`")]
    BadKey { key: String, command: String, pos: usize },
    #[error("\\{command}: wire count `{value}` is not a positive integer")]
    NonIntegerWires { value: String, command: String, pos: usize },
    #[error("\\{command}: {message}")]
    BadArgument { command: String, message: String, pos: usize },
    #[error("link at row {row}, column {col} with offset {offset} leaves the circuit", row = row + 1, col = col + 1)]
    LinkOutOfRange { row: usize, col: usize, offset: i64 },
    #[error("gate at row {row}, column {col} overlaps the gate at row {other_row}, column {other_col}",
        row = row + 1, col = col + 1, other_row = other_row + 1, other_col = other_col + 1)]
    OverlappingGateSpans { row: usize, col: usize, other_row: usize, other_col: usize },
    #[error("gate group at row {row}, column {col} extends past the circuit", row = row + 1, col = col + 1)]
    GroupOutOfRange { row: usize, col: usize },
    #[error("element at row {row}, column {col} spans {wires} wires, past the last row", row = row + 1, col = col + 1)]
    SpanOutOfRange { row: usize, col: usize, wires: usize },
    #[error("gate label at row {row}, column {col} is not inside a gate", row = row + 1, col = col + 1)]
    PortOutsideGate { row: usize, col: usize },
    #[error("arrow at row {row}, column {col} points outside the circuit", row = row + 1, col = col + 1)]
    ArrowOutOfRange { row: usize, col: usize },
    #[error("remove end slices={count} exceeds the {gaps} column gaps")]
    TooManyRemovedSlices { count: usize, gaps: usize },
}

impl ModelError {
    /// Source byte offset, when the error came from a specific command.
    pub fn position(&self) -> Option<usize> {
        match self {
            ModelError::UnknownCommand { pos, .. }
            | ModelError::BadKey { pos, .. }
            | ModelError::NonIntegerWires { pos, .. }
            | ModelError::BadArgument { pos, .. } => Some(*pos),
            _ => None,
        }
    }

    /// Grid cell (0-based), when the error is about one.
    pub fn cell(&self) -> Option<(usize, usize)> {
        match self {
            ModelError::LinkOutOfRange { row, col, .. }
            | ModelError::OverlappingGateSpans { row, col, .. }
            | ModelError::GroupOutOfRange { row, col }
            | ModelError::SpanOutOfRange { row, col, .. }
            | ModelError::PortOutsideGate { row, col }
            | ModelError::ArrowOutOfRange { row, col } => Some((*row, *col)),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum LintCode {
    L1,
    L2,
    L3,
    L4,
    L5,
    L6,
    L7,
}

impl fmt::Display for LintCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Info,
    Warning,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Lint {
    pub code: LintCode,
    pub message: String,
    /// 1-based grid row; absent for whole-document findings.
    pub row: Option<usize>,
    /// 1-based grid column.
    pub col: Option<usize>,
    #[serde(skip)]
    pub severity: Severity,
}

impl Lint {
    pub fn new(code: LintCode, message: impl Into<String>, cell: Option<(usize, usize)>) -> Self {
        let severity = if code == LintCode::L4 { Severity::Info } else { Severity::Warning };
        Lint { code, message: message.into(), row: cell.map(|c| c.0 + 1), col: cell.map(|c| c.1 + 1), severity }
    }
}
