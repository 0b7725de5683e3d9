use std::collections::BTreeSet;

use super::*;
use crate::style::parse_style;
use crate::syntax::{parse_key_values, CellItem, CellSource, CommandCall, KeyValue, MatrixSource};

/// Commands that must be followed by `{}` even when they take no label.
const NEEDS_BRACES: &[&str] =
    &["phase", "control", "ocontrol", "targ", "targX", "trash", "meter", "meterD", "measure", "measuretab"];

/// Commands that only produce label text.
const TEXT_MACROS: &[&str] = &["ldots", "cdots", "dots", "vdots", "ket", "bra"];

/// Commands accepted inside a cell.
const COMMANDS: &[&str] = &[
    "gate",
    "lstick",
    "rstick",
    "midstick",
    "phase",
    "ophase",
    "control",
    "ocontrol",
    "ctrl",
    "octrl",
    "ctrlbundle",
    "swap",
    "targX",
    "targ",
    "meter",
    "meterD",
    "measuretab",
    "measure",
    "trash",
    "push",
    "hphantom",
    "hphantomgate",
    "ghost",
    "qw",
    "cw",
    "qwbundle",
    "vqw",
    "vcw",
    "cwbend",
    "wave",
    "makeebit",
    "arrow",
    "slice",
    "gategroup",
    "gateinput",
    "gateoutput",
];

/// True for every command a cell may contain.
pub fn is_known_command(name: &str) -> bool {
    COMMANDS.contains(&name) || TEXT_MACROS.contains(&name)
}

enum Lowered {
    Node(Element),
    Weak(Element),
    Slice(SliceMark),
    Group(GateGroup),
    Port { input: bool, port: PortLabel },
}

struct Ctx<'a> {
    call: &'a CommandCall,
    cell: (usize, usize),
    lints: &'a mut Vec<Lint>,
}

impl Ctx<'_> {
    fn pos(&self) -> usize {
        self.call.span.start
    }

    fn bad_key(&self, kv: &KeyValue) -> ModelError {
        let key = match &kv.value {
            Some(v) => format!("{}={}", kv.key, v),
            None => kv.key.clone(),
        };
        ModelError::BadKey { key, command: self.call.name.clone(), pos: self.pos() }
    }

    fn bad_arg(&self, message: impl Into<String>) -> ModelError {
        ModelError::BadArgument { command: self.call.name.clone(), message: message.into(), pos: self.pos() }
    }

    fn opts(&self, i: usize) -> Vec<KeyValue> {
        self.call.opt(i).map(parse_key_values).unwrap_or_default()
    }

    fn arg(&self, i: usize) -> String {
        self.call.arg(i).unwrap_or_default().trim().to_string()
    }

    /// Records L7 for style keys we cannot draw.
    fn check_style(&mut self, what: &str, raw: &str) {
        for k in parse_style(raw).1 {
            let msg = format!("\\{}: {what} key `{k}` is not supported and was ignored", self.call.name);
            self.lints.push(Lint::new(LintCode::L7, msg, Some(self.cell)));
        }
    }

    fn wires(&self, value: &str) -> Result<usize, ModelError> {
        value.trim().parse::<usize>().ok().filter(|&w| w >= 1).ok_or_else(|| ModelError::NonIntegerWires {
            value: value.trim().to_string(),
            command: self.call.name.clone(),
            pos: self.pos(),
        })
    }

    fn offset(&self) -> Result<i64, ModelError> {
        let raw = self.arg(0);
        raw.parse::<i64>()
            .ok()
            .filter(|&k| k != 0)
            .ok_or_else(|| self.bad_arg(format!("`{raw}` is not a nonzero row offset")))
    }

    fn glyph_style(&mut self) -> String {
        let raw = self.call.opt(0).unwrap_or_default().to_string();
        self.check_style("style", &raw);
        raw
    }
}

fn is_number(key: &str) -> bool {
    !key.is_empty() && key.chars().all(|c| c.is_ascii_digit() || matches!(c, '.' | '-' | '+'))
}

fn index_set(ctx: &Ctx, kv: &KeyValue) -> Result<BTreeSet<usize>, ModelError> {
    let raw = kv.value.as_deref().ok_or_else(|| ctx.bad_key(kv))?;
    raw.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<usize>().map_err(|_| ctx.bad_key(kv)))
        .collect()
}

fn lower_gate(ctx: &mut Ctx) -> Result<Element, ModelError> {
    let mut wires = 1;
    let mut disable_auto_height = false;
    let mut swap_variant = false;
    let (mut cwires, mut nwires, mut bundle) = (BTreeSet::new(), BTreeSet::new(), BTreeSet::new());
    let (mut style, mut label_style) = (String::new(), String::new());
    for kv in ctx.opts(0) {
        match (kv.key.as_str(), kv.value.as_deref()) {
            ("wires", Some(v)) => wires = ctx.wires(v)?,
            (k, None) if is_number(k) => wires = ctx.wires(k)?,
            ("disable auto height", None) => disable_auto_height = true,
            ("swap", None) => swap_variant = true,
            ("cwires", _) => cwires = index_set(ctx, &kv)?,
            ("nwires", _) => nwires = index_set(ctx, &kv)?,
            ("bundle", _) => bundle = index_set(ctx, &kv)?,
            ("style", Some(v)) => {
                style = v.to_string();
                ctx.check_style("style", v);
            }
            ("label style", Some(v)) => {
                label_style = v.to_string();
                ctx.check_style("label style", v);
            }
            _ => return Err(ctx.bad_key(&kv)),
        }
    }
    if swap_variant {
        wires = 2;
    }
    for (name, set) in [("cwires", &cwires), ("nwires", &nwires), ("bundle", &bundle)] {
        if set.iter().any(|&i| i < 1 || i > wires) {
            let key = format!("{name} (indices must lie in 1..={wires})");
            return Err(ModelError::BadKey { key, command: "gate".into(), pos: ctx.pos() });
        }
    }
    if !cwires.is_disjoint(&nwires) || !cwires.is_disjoint(&bundle) || !nwires.is_disjoint(&bundle) {
        let key = "cwires/nwires/bundle (sets must be disjoint)".to_string();
        return Err(ModelError::BadKey { key, command: "gate".into(), pos: ctx.pos() });
    }
    let min_width = match ctx.call.opt(1) {
        None => None,
        Some(raw) => Some(raw.trim().parse::<Length>().map_err(|_| ctx.bad_key(&KeyValue::new(raw.trim(), None)))?),
    };
    Ok(Element::Gate {
        label: ctx.arg(0),
        wires,
        min_width,
        height_label: ctx.call.opt(2).map(|s| s.trim().to_string()),
        disable_auto_height,
        swap_variant,
        cwires,
        nwires,
        bundle,
        style,
        label_style,
        inputs: Vec::new(),
        outputs: Vec::new(),
    })
}

fn lower_stick(ctx: &mut Ctx, side: StickSide) -> Result<Element, ModelError> {
    let mut wires = 1;
    let mut brackets = None;
    let (mut label_style, mut brace_style) = (String::new(), String::new());
    for kv in ctx.opts(0) {
        match (kv.key.as_str(), kv.value.as_deref()) {
            ("wires", Some(v)) => wires = ctx.wires(v)?,
            (k, None) if is_number(k) => wires = ctx.wires(k)?,
            ("brackets", Some(v)) => {
                brackets = Some(match v.trim() {
                    "none" => Brackets::None,
                    "left" => Brackets::Left,
                    "right" => Brackets::Right,
                    "both" => Brackets::Both,
                    _ => return Err(ctx.bad_key(&kv)),
                })
            }
            ("label style", Some(v)) => {
                label_style = v.to_string();
                ctx.check_style("label style", v);
            }
            ("braces", Some(v)) => {
                brace_style = v.to_string();
                ctx.check_style("braces", v);
            }
            _ => return Err(ctx.bad_key(&kv)),
        }
    }
    let brackets = brackets.unwrap_or(match (side, wires > 1) {
        (_, false) => Brackets::None,
        (StickSide::Left, true) => Brackets::Right,
        (StickSide::Right, true) => Brackets::Left,
        (StickSide::Mid, true) => Brackets::Both,
    });
    Ok(Element::Stick { side, label: ctx.arg(0), wires, brackets, label_style, brace_style })
}

fn lower_port(ctx: &mut Ctx, input: bool) -> Result<Lowered, ModelError> {
    let mut wires = 1;
    let (mut label_style, mut brace_style) = (String::new(), String::new());
    for kv in ctx.opts(0) {
        match (kv.key.as_str(), kv.value.as_deref()) {
            ("wires", Some(v)) => wires = ctx.wires(v)?,
            (k, None) if is_number(k) => wires = ctx.wires(k)?,
            ("label style", Some(v)) => {
                label_style = v.to_string();
                ctx.check_style("label style", v);
            }
            ("braces", Some(v)) => {
                brace_style = v.to_string();
                ctx.check_style("braces", v);
            }
            _ => return Err(ctx.bad_key(&kv)),
        }
    }
    let port = PortLabel { label: ctx.arg(0), row_offset: 0, wires, label_style, brace_style };
    Ok(Lowered::Port { input, port })
}

fn lower_group(ctx: &mut Ctx) -> Result<Lowered, ModelError> {
    let mut g = GateGroup {
        wires: 1,
        steps: 1,
        label: ctx.arg(0),
        style: String::new(),
        label_style: String::new(),
        background: false,
    };
    for kv in ctx.opts(0) {
        match (kv.key.as_str(), kv.value.as_deref()) {
            ("wires", Some(v)) => g.wires = ctx.wires(v)?,
            (k, None) if is_number(k) => g.wires = ctx.wires(k)?,
            ("steps", Some(v)) => {
                g.steps = v.trim().parse().ok().filter(|&s| s >= 1).ok_or_else(|| ctx.bad_key(&kv))?
            }
            ("background", None) => g.background = true,
            ("style", Some(v)) => {
                g.style = v.to_string();
                ctx.check_style("style", v);
            }
            ("label style", Some(v)) => {
                g.label_style = v.to_string();
                ctx.check_style("label style", v);
            }
            _ => return Err(ctx.bad_key(&kv)),
        }
    }
    Ok(Lowered::Group(g))
}

fn lower_slice(ctx: &mut Ctx) -> Result<Lowered, ModelError> {
    let mut s = SliceMark { title: ctx.arg(0), style: String::new(), label_style: String::new() };
    for kv in ctx.opts(0) {
        match (kv.key.as_str(), kv.value.as_deref()) {
            ("style", Some(v)) => {
                s.style = v.to_string();
                ctx.check_style("style", v);
            }
            ("label style", Some(v)) => {
                s.label_style = v.to_string();
                ctx.check_style("label style", v);
            }
            _ => return Err(ctx.bad_key(&kv)),
        }
    }
    Ok(Lowered::Slice(s))
}

fn lower_bundle(ctx: &mut Ctx) -> Result<Element, ModelError> {
    let mut b = Bundle { count: ctx.arg(0), alternate: false, alt2: false };
    for kv in ctx.opts(0) {
        match (kv.key.as_str(), kv.value.as_deref().map(str::trim)) {
            ("alternate", None) => b.alternate = true,
            ("alternate", Some("2")) => {
                b.alternate = true;
                b.alt2 = true;
            }
            ("alternate", Some("3")) => b.alternate = true,
            _ => return Err(ctx.bad_key(&kv)),
        }
    }
    Ok(Element::WireStub { kind: WireKind::Bundle(b) })
}

fn lower_arrow(ctx: &mut Ctx) -> Result<Element, ModelError> {
    let mut dirs = None;
    let mut style = Vec::new();
    for kv in ctx.opts(0) {
        let is_dirs = kv.value.is_none() && !kv.key.is_empty() && kv.key.chars().all(|c| "udlr".contains(c));
        if is_dirs && dirs.is_none() {
            dirs = Some(
                kv.key
                    .chars()
                    .map(|c| match c {
                        'u' => Dir::Up,
                        'd' => Dir::Down,
                        'l' => Dir::Left,
                        _ => Dir::Right,
                    })
                    .collect::<Vec<_>>(),
            );
        } else {
            style.push(kv);
        }
    }
    let dirs = dirs.ok_or_else(|| ctx.bad_arg("missing direction such as [r]"))?;
    let style = crate::syntax::serialize_key_values(&style);
    ctx.check_style("style", &style);
    Ok(Element::ArrowMark { dirs, style })
}

fn lower_ebit(ctx: &mut Ctx) -> Result<Element, ModelError> {
    let angle_deg = match ctx.call.opt(0) {
        None => -45.0,
        Some(raw) => raw
            .trim()
            .parse::<f64>()
            .ok()
            .filter(|a| a.is_finite())
            .ok_or_else(|| ctx.bad_arg(format!("`{raw}` is not an angle")))?,
    };
    let label_style = ctx.call.opt(1).unwrap_or_default().to_string();
    ctx.check_style("label style", &label_style);
    Ok(Element::Ebit { angle_deg, label: ctx.arg(0), label_style })
}

fn lower_command(ctx: &mut Ctx) -> Result<Lowered, ModelError> {
    use Lowered::{Node, Weak};
    let name = ctx.call.name.as_str();
    if NEEDS_BRACES.contains(&name) && ctx.call.braced_args.is_empty() {
        let msg = format!("\\{name} must be followed by an argument, even an empty one: \\{name}{{}}");
        ctx.lints.push(Lint::new(LintCode::L1, msg, Some(ctx.cell)));
    }
    let phase_dot = |ctx: &mut Ctx, open: bool, label: String| {
        let style = ctx.glyph_style();
        let label_position = parse_key_values(&style)
            .into_iter()
            .find(|kv| kv.key == "label position")
            .and_then(|kv| kv.value)
            .unwrap_or_default();
        Element::PhaseDot { phase_label: label, open, style, label_position }
    };
    let meter = |ctx: &mut Ctx, variant| {
        let style = ctx.glyph_style();
        Element::Meter { variant, basis_label: ctx.arg(0), style }
    };
    Ok(match name {
        "gate" => Node(lower_gate(ctx)?),
        "lstick" => Node(lower_stick(ctx, StickSide::Left)?),
        "rstick" => Node(lower_stick(ctx, StickSide::Right)?),
        "midstick" => Node(lower_stick(ctx, StickSide::Mid)?),
        "phase" => {
            let label = ctx.arg(0);
            Node(phase_dot(ctx, false, label))
        }
        "ophase" => {
            let label = ctx.arg(0);
            Node(phase_dot(ctx, true, label))
        }
        "control" => Node(phase_dot(ctx, false, String::new())),
        "ocontrol" => Node(phase_dot(ctx, true, String::new())),
        "ctrl" | "octrl" => {
            if let Some(kv) = ctx.opts(0).first() {
                return Err(ctx.bad_key(kv));
            }
            Node(Element::CtrlLine { offset: ctx.offset()?, open: name == "octrl", bundle: false, bundle_wires: None })
        }
        "ctrlbundle" => {
            let bundle_wires = match ctx.call.opt(0).map(str::trim) {
                None => None,
                Some("2") => Some(2),
                Some("3") => Some(3),
                Some(other) => return Err(ctx.bad_key(&KeyValue::new(other, None))),
            };
            Node(Element::CtrlLine { offset: ctx.offset()?, open: false, bundle: true, bundle_wires })
        }
        "swap" => {
            let style = ctx.glyph_style();
            Node(Element::SwapCross { offset: Some(ctx.offset()?), style })
        }
        "targX" => Node(Element::SwapCross { offset: None, style: ctx.glyph_style() }),
        "targ" => Node(Element::TargCircle { style: ctx.glyph_style() }),
        "meter" => Node(meter(ctx, MeterVariant::Box)),
        "meterD" => Node(meter(ctx, MeterVariant::D)),
        "measuretab" => Node(meter(ctx, MeterVariant::Tab)),
        "measure" => Node(meter(ctx, MeterVariant::Rounded)),
        "trash" => {
            let style = ctx.glyph_style();
            Node(Element::Trash { label: ctx.arg(0), style })
        }
        "push" => Node(Element::Push { content: ctx.arg(0) }),
        "hphantom" => Weak(Element::Phantom { kind: PhantomKind::BoxWidener, content: ctx.arg(0) }),
        "hphantomgate" => Weak(Element::Phantom { kind: PhantomKind::WireLengthener, content: ctx.arg(0) }),
        "ghost" => Weak(Element::Phantom { kind: PhantomKind::Ghost, content: ctx.arg(0) }),
        "qw" => Weak(Element::WireStub { kind: WireKind::Quantum }),
        "cw" => Weak(Element::WireStub { kind: WireKind::Classical }),
        "qwbundle" => Weak(lower_bundle(ctx)?),
        "vqw" => Weak(Element::VerticalWire { offset: ctx.offset()?, kind: VerticalKind::Quantum }),
        "vcw" => Weak(Element::VerticalWire { offset: ctx.offset()?, kind: VerticalKind::Classical }),
        "cwbend" => Node(Element::ClassicalBend { offset: ctx.offset()? }),
        "wave" => Node(Element::Wave { style: ctx.glyph_style() }),
        "makeebit" => Node(lower_ebit(ctx)?),
        "arrow" => Weak(lower_arrow(ctx)?),
        "slice" => lower_slice(ctx)?,
        "gategroup" => lower_group(ctx)?,
        "gateinput" => lower_port(ctx, true)?,
        "gateoutput" => lower_port(ctx, false)?,
        _ => return Err(ModelError::UnknownCommand { name: name.to_string(), pos: ctx.pos() }),
    })
}

fn macro_text(call: &CommandCall) -> String {
    let mut s = format!("\\{}", call.name);
    for a in &call.braced_args {
        s.push('{');
        s.push_str(a);
        s.push('}');
    }
    s
}

struct PendingPort {
    cell: (usize, usize),
    input: bool,
    port: PortLabel,
}

fn lower_cell(
    src: &CellSource,
    cell: (usize, usize),
    lints: &mut Vec<Lint>,
    ports: &mut Vec<PendingPort>,
) -> Result<CellModel, ModelError> {
    let mut out = CellModel::empty(src.span.start);
    let mut primary: Option<Element> = None;
    let mut weak: Vec<Element> = Vec::new();
    let mut text = String::new();
    let mut flagged = false;

    let mut place_node = |node: Element, what: &str, primary: &mut Option<Element>, lints: &mut Vec<Lint>| {
        if primary.is_none() {
            *primary = Some(node);
        } else if !flagged {
            flagged = true;
            let msg = format!("{what} is not the first command in its cell and was ignored");
            lints.push(Lint::new(LintCode::L2, msg, Some(cell)));
        }
    };

    for item in &src.items {
        let call = match item {
            CellItem::InlineNodeStyle { raw, .. } => {
                let msg = format!("inline node style |[{raw}]| is not supported; the cell is drawn empty");
                lints.push(Lint::new(LintCode::L6, msg, Some(cell)));
                continue;
            }
            CellItem::Text { content, .. } => {
                text.push_str(content);
                continue;
            }
            CellItem::Command(call) if TEXT_MACROS.contains(&call.name.as_str()) => {
                text.push_str(&macro_text(call));
                continue;
            }
            CellItem::Command(call) => call,
        };
        if !text.is_empty() {
            let content = std::mem::take(&mut text);
            place_node(Element::Push { content }, "text", &mut primary, lints);
        }
        let mut ctx = Ctx { call, cell, lints };
        match lower_command(&mut ctx)? {
            Lowered::Node(e) => {
                let what = format!("\\{}", call.name);
                place_node(e, &what, &mut primary, lints)
            }
            Lowered::Weak(e) => weak.push(e),
            Lowered::Slice(s) => out.attachments.push(Attachment::Slice(s)),
            Lowered::Group(g) => out.attachments.push(Attachment::Group(g)),
            Lowered::Port { input, port } => ports.push(PendingPort { cell, input, port }),
        }
    }
    if !text.is_empty() {
        place_node(Element::Push { content: text.trim_end().to_string() }, "text", &mut primary, lints);
    }
    let mut weak = weak.into_iter();
    out.element = match primary {
        Some(p) => p,
        None => weak.next().unwrap_or(Element::Empty),
    };
    out.attachments.extend(weak.map(Attachment::Extra));
    Ok(out)
}

fn element_span(e: &Element) -> usize {
    match e {
        Element::Gate { wires, .. } | Element::Stick { wires, .. } => *wires,
        _ => 1,
    }
}

/// Maps every command to its element, pads rows to a rectangle, marks cells
/// spanned by multi-wire gates and moves gate port labels into their gates.
pub fn lower(matrix: &MatrixSource) -> Result<(CircuitGrid, EnvOptions, Vec<Lint>), ModelError> {
    let (env, mut lints) = parse_env_options(&matrix.env_options())?;
    let mut ports = Vec::new();
    let mut cells = Vec::new();
    for (r, row) in matrix.rows.iter().enumerate() {
        let mut out = Vec::new();
        for (c, cell) in row.cells.iter().enumerate() {
            out.push(lower_cell(cell, (r, c), &mut lints, &mut ports)?);
        }
        cells.push(out);
    }
    let raw_widths: Vec<usize> = cells.iter().map(Vec::len).collect();
    let cols = raw_widths.iter().copied().max().unwrap_or(0);
    for row in &mut cells {
        let pad = row.last().map_or(0, |c: &CellModel| c.pos);
        row.resize_with(cols, || CellModel::empty(pad));
    }
    if matrix.trailing_row_separator.is_some() {
        let at = raw_widths.len().checked_sub(1).map(|r| (r, raw_widths[r].saturating_sub(1)));
        lints.push(Lint::new(LintCode::L3, "the last row ends with \\\\; remove it", at));
    }

    let rows = cells.len();
    for r in 0..rows {
        for c in 0..cols {
            let span = element_span(&cells[r][c].element);
            if r + span > rows {
                return Err(ModelError::SpanOutOfRange { row: r, col: c, wires: span });
            }
            if matches!(cells[r][c].element, Element::Gate { .. }) {
                for below in cells.iter_mut().take(r + span).skip(r + 1) {
                    below[c].covered_by.get_or_insert((r, c));
                }
            }
        }
    }

    for p in ports {
        let (r, c) = p.cell;
        let host = match (&cells[r][c].element, cells[r][c].covered_by) {
            (Element::Gate { .. }, _) => (r, c),
            (_, Some(h)) => h,
            _ => return Err(ModelError::PortOutsideGate { row: r, col: c }),
        };
        let offset = r - host.0;
        let Element::Gate { wires, inputs, outputs, .. } = &mut cells[host.0][host.1].element else {
            unreachable!("covered_by always points at a gate");
        };
        if offset + p.port.wires > *wires {
            return Err(ModelError::PortOutsideGate { row: r, col: c });
        }
        let port = PortLabel { row_offset: offset, ..p.port };
        if p.input {
            inputs.push(port);
        } else {
            outputs.push(port);
        }
    }

    let grid = CircuitGrid {
        cells,
        raw_widths,
        col_extra_space: matrix.col_extra_space.clone(),
        row_extra_space: matrix.row_extra_space.clone(),
        lints: lints.clone(),
    };
    Ok((grid, env, lints))
}
