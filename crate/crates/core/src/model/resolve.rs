use super::*;

fn endpoint_of(cell: &CellModel) -> Endpoint {
    if cell.covered_by.is_some() {
        return Endpoint::None;
    }
    match &cell.element {
        Element::PhaseDot { open: false, .. } | Element::CtrlLine { open: false, .. } => Endpoint::Dot,
        Element::PhaseDot { open: true, .. } | Element::CtrlLine { open: true, .. } => Endpoint::OpenDot,
        Element::TargCircle { .. } => Endpoint::Targ,
        Element::SwapCross { .. } => Endpoint::Cross,
        _ => Endpoint::None,
    }
}

fn target_row(grid: &CircuitGrid, row: usize, col: usize, offset: i64) -> Result<usize, ModelError> {
    let to = row as i64 + offset;
    if offset == 0 || to < 0 || to >= grid.rows() as i64 {
        return Err(ModelError::LinkOutOfRange { row, col, offset });
    }
    Ok(to as usize)
}

fn links(grid: &CircuitGrid) -> Result<Vec<VerticalLink>, ModelError> {
    let mut out = Vec::new();
    for (r, row) in grid.cells.iter().enumerate() {
        for (c, cell) in row.iter().enumerate() {
            for el in cell.elements() {
                let (offset, kind) = match el {
                    Element::CtrlLine { offset, .. } | Element::SwapCross { offset: Some(offset), .. } => {
                        (*offset, LinkKind::Quantum)
                    }
                    Element::VerticalWire { offset, kind: VerticalKind::Quantum } => (*offset, LinkKind::Quantum),
                    Element::VerticalWire { offset, kind: VerticalKind::Classical } => (*offset, LinkKind::Classical),
                    Element::ClassicalBend { offset } => (*offset, LinkKind::Bend),
                    _ => continue,
                };
                let to = target_row(grid, r, c, offset)?;
                let from_end = match el {
                    Element::ClassicalBend { .. } => Endpoint::None,
                    _ => endpoint_of(cell),
                };
                let (bundle, bundle_wires) = match el {
                    Element::CtrlLine { bundle, bundle_wires, .. } => (*bundle, *bundle_wires),
                    _ => (false, None),
                };
                out.push(VerticalLink {
                    col: c,
                    from_row: r,
                    to_row: to,
                    kind,
                    endpoints: (from_end, endpoint_of(grid.cell(to, c))),
                    bundle,
                    bundle_wires,
                    swap: matches!(el, Element::SwapCross { .. }),
                });
            }
        }
    }
    Ok(out)
}

fn check_overlaps(grid: &CircuitGrid) -> Result<(), ModelError> {
    let mut owner: BTreeMap<(usize, usize), (usize, usize)> = BTreeMap::new();
    for (r, row) in grid.cells.iter().enumerate() {
        for (c, cell) in row.iter().enumerate() {
            let Element::Gate { wires, .. } = &cell.element else { continue };
            for rr in r + 1..r + wires {
                if let Some(&(or, oc)) = owner.get(&(rr, c)) {
                    return Err(ModelError::OverlappingGateSpans { row: r, col: c, other_row: or, other_col: oc });
                }
                owner.insert((rr, c), (r, c));
                let strong = !matches!(
                    grid.cell(rr, c).element,
                    Element::Empty | Element::WireStub { .. } | Element::Phantom { .. }
                );
                if strong {
                    return Err(ModelError::OverlappingGateSpans { row: rr, col: c, other_row: r, other_col: c });
                }
            }
        }
    }
    Ok(())
}

/// Kind of the wire entering `cell` from its left neighbour.
fn incoming(grid: &CircuitGrid, r: usize, c: usize) -> SegmentKind {
    let cell = grid.cell(r, c);
    if let Some(stub) = cell.stub() {
        return stub.into();
    }
    let (host, index) = match (cell.covered_by, &cell.element) {
        (Some((hr, hc)), _) => ((hr, hc), r - hr + 1),
        (None, Element::Gate { .. }) => ((r, c), 1),
        _ => return primary_kind(&cell.element),
    };
    let Element::Gate { cwires, nwires, bundle, .. } = &grid.cell(host.0, host.1).element else {
        return SegmentKind::Quantum;
    };
    if cwires.contains(&index) {
        SegmentKind::Classical
    } else if nwires.contains(&index) {
        SegmentKind::None
    } else if bundle.contains(&index) {
        SegmentKind::Bundle(Bundle { count: String::new(), alternate: true, alt2: false })
    } else {
        SegmentKind::Quantum
    }
}

fn primary_kind(el: &Element) -> SegmentKind {
    match el {
        Element::CtrlLine { bundle: true, bundle_wires, .. } => {
            SegmentKind::Bundle(Bundle { count: String::new(), alternate: true, alt2: *bundle_wires == Some(2) })
        }
        Element::Gate { .. }
        | Element::PhaseDot { .. }
        | Element::CtrlLine { .. }
        | Element::SwapCross { .. }
        | Element::TargCircle { .. }
        | Element::Meter { .. }
        | Element::Trash { .. } => SegmentKind::Quantum,
        Element::ClassicalBend { .. } => SegmentKind::Classical,
        _ => SegmentKind::None,
    }
}

fn slice_title(env: &EnvOptions, index: usize) -> String {
    match &env.slice_titles {
        Some(t) => t.replace("\\col", &index.to_string()),
        None => index.to_string(),
    }
}

fn slices(grid: &CircuitGrid, env: &EnvOptions) -> Result<Vec<SlicePlacement>, ModelError> {
    let mut placed: BTreeMap<usize, SlicePlacement> = BTreeMap::new();
    let gaps = grid.cols().saturating_sub(1);
    if env.slice_all {
        if env.remove_end_slices > gaps {
            return Err(ModelError::TooManyRemovedSlices { count: env.remove_end_slices, gaps });
        }
        for g in 0..gaps - env.remove_end_slices {
            placed.insert(
                g,
                SlicePlacement {
                    after_col: g,
                    title: slice_title(env, g + 1),
                    style: env.slice_style.clone(),
                    label_style: env.slice_label_style.clone(),
                },
            );
        }
    }
    for row in &grid.cells {
        for (c, cell) in row.iter().enumerate() {
            for a in &cell.attachments {
                if let Attachment::Slice(s) = a {
                    // explicit style layers on top of the environment's slice style
                    let join = |env: &str, own: &str| match (env.is_empty(), own.is_empty()) {
                        (true, _) => own.to_string(),
                        (_, true) => env.to_string(),
                        _ => format!("{env},{own}"),
                    };
                    placed.insert(
                        c,
                        SlicePlacement {
                            after_col: c,
                            title: s.title.clone(),
                            style: join(&env.slice_style, &s.style),
                            label_style: join(&env.slice_label_style, &s.label_style),
                        },
                    );
                }
            }
        }
    }
    Ok(placed.into_values().collect())
}

fn groups(grid: &CircuitGrid) -> Result<Vec<GroupPlacement>, ModelError> {
    let mut out = Vec::new();
    for (r, row) in grid.cells.iter().enumerate() {
        for (c, cell) in row.iter().enumerate() {
            for a in &cell.attachments {
                if let Attachment::Group(g) = a {
                    if r + g.wires > grid.rows() || c + g.steps > grid.cols() {
                        return Err(ModelError::GroupOutOfRange { row: r, col: c });
                    }
                    out.push(GroupPlacement { row: r, col: c, group: g.clone() });
                }
            }
        }
    }
    Ok(out)
}

fn arrows(grid: &CircuitGrid) -> Result<Vec<ArrowPlacement>, ModelError> {
    let mut out = Vec::new();
    for (r, row) in grid.cells.iter().enumerate() {
        for (c, cell) in row.iter().enumerate() {
            for el in cell.elements() {
                let Element::ArrowMark { dirs, style } = el else { continue };
                let (mut tr, mut tc) = (r as i64, c as i64);
                for d in dirs {
                    match d {
                        Dir::Up => tr -= 1,
                        Dir::Down => tr += 1,
                        Dir::Left => tc -= 1,
                        Dir::Right => tc += 1,
                    }
                }
                if tr < 0 || tc < 0 || tr >= grid.rows() as i64 || tc >= grid.cols() as i64 {
                    return Err(ModelError::ArrowOutOfRange { row: r, col: c });
                }
                out.push(ArrowPlacement { from: (r, c), to: (tr as usize, tc as usize), style: style.clone() });
            }
        }
    }
    Ok(out)
}

/// Resolves links, wire kinds, slices, groups and arrows on a lowered grid.
pub fn resolve(grid: CircuitGrid, env: EnvOptions) -> Result<ResolvedCircuit, ModelError> {
    check_overlaps(&grid)?;
    let links = links(&grid)?;
    let mut wire_segments = BTreeMap::new();
    for r in 0..grid.rows() {
        for g in 0..grid.cols().saturating_sub(1) {
            wire_segments.insert((r, g), incoming(&grid, r, g + 1));
        }
    }
    let slices = slices(&grid, &env)?;
    let groups = groups(&grid)?;
    let arrows = arrows(&grid)?;
    Ok(ResolvedCircuit { grid, env, links, wire_segments, slices, groups, arrows })
}

impl VerticalLink {
    /// Same link oriented top to bottom.
    pub fn normalized(&self) -> VerticalLink {
        if self.from_row <= self.to_row {
            return self.clone();
        }
        VerticalLink {
            from_row: self.to_row,
            to_row: self.from_row,
            endpoints: (self.endpoints.1, self.endpoints.0),
            ..self.clone()
        }
    }

    pub fn top(&self) -> usize {
        self.from_row.min(self.to_row)
    }

    pub fn bottom(&self) -> usize {
        self.from_row.max(self.to_row)
    }
}
