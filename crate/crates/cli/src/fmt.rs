//! Output formatting: every float printed by a command goes through
//! `sig17`, so tables round-trip through text without precision loss and
//! repeated runs are byte-identical.

/// 17 significant digits in scientific notation, '.' decimal point.
pub fn sig17(x: f64) -> String {
    format!("{x:.16e}")
}

/// One CSV row from already-formatted cells.
pub fn csv_row(cells: &[String]) -> String {
    cells.join(",")
}
