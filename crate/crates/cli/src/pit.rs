//! Empirical probability integral transform by ranks.

use crate::error::{CliError, CliResult};
use crate::table::Table;

/// Fewest rows accepted by the transform.
pub const MIN_ROWS: usize = 10;

/// Ranks `1..=N` of `x`, with tied values sharing the mean of their ranks.
pub fn midranks(x: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..x.len()).collect();
    order.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
    let mut ranks = vec![0.0; x.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && x[order[end]] == x[order[start]] {
            end += 1;
        }
        // positions start..end hold ranks start+1..=end
        let mid = (start + 1 + end) as f64 / 2.0;
        for &i in &order[start..end] {
            ranks[i] = mid;
        }
        start = end;
    }
    ranks
}

/// Pseudo-observations `rank / (N + 1)` of one column.
pub fn pit_column(x: &[f64]) -> Vec<f64> {
    let scale = (x.len() + 1) as f64;
    midranks(x).into_iter().map(|r| r / scale).collect()
}

/// Column-wise rank transform of a whole table.
pub fn pit_table(table: &Table) -> CliResult<Table> {
    let n = table.rows.len();
    if n < MIN_ROWS {
        return Err(CliError::invalid(format!(
            "need at least {MIN_ROWS} rows, got {n}"
        )));
    }
    let mut cols = Vec::with_capacity(table.n_cols());
    for (j, name) in table.header.iter().enumerate() {
        let x = table.column(j);
        if x.iter().all(|&v| v == x[0]) {
            return Err(CliError::invalid(format!("column '{name}' is constant")));
        }
        cols.push(pit_column(&x));
    }
    Ok(Table::from_columns(table.header.clone(), &cols))
}
