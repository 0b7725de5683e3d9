use super::*;

/// All findings for a resolved circuit: those made while lowering plus the
/// ones that need the whole grid (L4, L5), in reading order.
pub fn validate(rc: &ResolvedCircuit) -> Vec<Lint> {
    let mut lints = rc.grid.lints.clone();
    let cols = rc.grid.cols();
    for (r, &w) in rc.grid.raw_widths.iter().enumerate() {
        if w < cols {
            let msg = format!("row has {w} of {cols} cells; padded with empty cells");
            lints.push(Lint::new(LintCode::L4, msg, Some((r, w.saturating_sub(1)))));
        }
    }
    if let Some(r) = rc.grid.rows().checked_sub(1) {
        let last = rc.grid.raw_widths[r];
        if last > 0 && matches!(rc.grid.cell(r, last - 1).element, Element::ClassicalBend { .. }) {
            let msg = "\\cwbend in the bottom right cell; add an extra & after it";
            lints.push(Lint::new(LintCode::L5, msg, Some((r, last - 1))));
        }
    }
    lints.sort_by(|a, b| (a.row, a.col, a.code, &a.message).cmp(&(b.row, b.col, b.code, &b.message)));
    lints.dedup();
    lints
}
