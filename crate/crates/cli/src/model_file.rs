//! Plain-text model files.
//!
//! ```text
//! dimension 3
//! structure
//! 1 0 0
//! 3 3 0
//! 2 2 2
//! family
//! 0 0 0
//! 1 0 0
//! 2 3 0
//! parameter 1
//! ...
//! parameter 2
//! ...
//! ```
//!
//! Matrices are written as full square rows with zeros above the diagonal.
//! Family entries are the numeric codes of [`FamilyTag`]; the second
//! parameter matrix holds Student-t degrees of freedom. Reals carry 17
//! significant digits, enough to read back the identical `f64`.

use std::fmt::Write as _;
use std::path::Path;

use rvine_core::bicop::{FamilyTag, PairCopula};
use rvine_core::matrix::TriMatrix;
use rvine_core::structure::RVineStructure;
use rvine_core::RVineModel;

use crate::error::{CliError, CliResult};

const SECTIONS: [&str; 4] = ["structure", "family", "parameter 1", "parameter 2"];

fn write_matrix<T>(
    out: &mut String,
    n: usize,
    cell: impl Fn(usize, usize) -> Option<T>,
    fmt: impl Fn(&T) -> String,
    zero: &str,
) {
    for r in 0..n {
        let line: Vec<String> = (0..n)
            .map(|c| cell(r, c).map_or_else(|| zero.to_string(), |v| fmt(&v)))
            .collect();
        writeln!(out, "{}", line.join(" ")).expect("writing to a String");
    }
}

pub fn to_text(model: &RVineModel) -> String {
    let n = model.dim();
    let s = model.structure();
    let real = |x: &f64| format!("{x:.16e}");
    let real_zero = real(&0.0);
    let edge = |r: usize, c: usize| (r > c).then(|| *model.copula(r, c));
    let mut out = format!("dimension {n}\n");
    out.push_str("structure\n");
    write_matrix(
        &mut out,
        n,
        |r, c| (r >= c).then(|| s.get(r, c)),
        |v| v.to_string(),
        "0",
    );
    out.push_str("family\n");
    write_matrix(
        &mut out,
        n,
        |r, c| edge(r, c).map(|p| p.family().code()),
        |v| v.to_string(),
        "0",
    );
    out.push_str("parameter 1\n");
    write_matrix(
        &mut out,
        n,
        |r, c| edge(r, c).filter(|p| p.n_params() > 0).map(|p| p.theta()),
        real,
        &real_zero,
    );
    out.push_str("parameter 2\n");
    write_matrix(
        &mut out,
        n,
        |r, c| edge(r, c).and_then(|p| p.nu()),
        real,
        &real_zero,
    );
    out
}

fn parse_rows<T: std::str::FromStr>(
    lines: &[&str],
    n: usize,
    section: &str,
) -> CliResult<Vec<Vec<T>>> {
    if lines.len() != n {
        return Err(CliError::invalid(format!(
            "section '{section}' has {} rows, expected {n}",
            lines.len()
        )));
    }
    lines
        .iter()
        .enumerate()
        .map(|(r, line)| {
            let cells: Vec<&str> = line.split_whitespace().collect();
            if cells.len() != n {
                return Err(CliError::invalid(format!(
                    "section '{section}', row {}: {} entries, expected {n}",
                    r + 1,
                    cells.len()
                )));
            }
            cells
                .iter()
                .map(|c| {
                    c.parse().map_err(|_| {
                        CliError::invalid(format!(
                            "section '{section}', row {}: bad entry '{c}'",
                            r + 1
                        ))
                    })
                })
                .collect()
        })
        .collect()
}

pub fn from_text(text: &str) -> CliResult<RVineModel> {
    let lines: Vec<&str> = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .collect();
    let n: usize = lines
        .first()
        .and_then(|l| l.strip_prefix("dimension"))
        .and_then(|d| d.trim().parse().ok())
        .filter(|&n| n >= 2)
        .ok_or_else(|| CliError::invalid("model file must start with 'dimension n', n >= 2"))?;
    let mut at = 1;
    let mut blocks = Vec::with_capacity(SECTIONS.len());
    for name in SECTIONS {
        if lines.get(at) != Some(&name) {
            return Err(CliError::invalid(format!(
                "expected section '{name}' at line {}",
                at + 1
            )));
        }
        let body = lines.get(at + 1..at + 1 + n).unwrap_or(&[]);
        blocks.push(body);
        at += 1 + n;
    }
    if at != lines.len() {
        return Err(CliError::invalid("trailing content after 'parameter 2'"));
    }
    let structure_rows: Vec<Vec<usize>> = parse_rows(blocks[0], n, SECTIONS[0])?;
    let structure = RVineStructure::from_rows(&structure_rows)?;
    let codes: Vec<Vec<u32>> = parse_rows(blocks[1], n, SECTIONS[1])?;
    let p1: Vec<Vec<f64>> = parse_rows(blocks[2], n, SECTIONS[2])?;
    let p2: Vec<Vec<f64>> = parse_rows(blocks[3], n, SECTIONS[3])?;
    let mut copulas = TriMatrix::new(n);
    for r in 0..n {
        for c in 0..n {
            let at = format!("row {}, column {}", r + 1, c + 1);
            if r <= c {
                if codes[r][c] != 0 || p1[r][c] != 0.0 || p2[r][c] != 0.0 {
                    return Err(CliError::invalid(format!(
                        "{at}: entries on or above the diagonal must be 0"
                    )));
                }
                continue;
            }
            let family = FamilyTag::from_code(codes[r][c]).ok_or_else(|| {
                CliError::invalid(format!("{at}: unknown family code {}", codes[r][c]))
            })?;
            let nu = (family == FamilyTag::StudentT).then_some(p2[r][c]);
            if family.n_params() == 0 && p1[r][c] != 0.0 {
                return Err(CliError::invalid(format!(
                    "{at}: independence takes no parameter"
                )));
            }
            if nu.is_none() && p2[r][c] != 0.0 {
                return Err(CliError::invalid(format!(
                    "{at}: {family} has no second parameter"
                )));
            }
            let copula = if family == FamilyTag::Independence {
                PairCopula::independence()
            } else {
                PairCopula::new(family, p1[r][c], nu)
                    .map_err(|e| CliError::invalid(format!("{at}: {e}")))?
            };
            copulas.set(r, c, copula);
        }
    }
    Ok(RVineModel::new(structure, copulas)?)
}

pub fn save(model: &RVineModel, path: &Path) -> CliResult<()> {
    std::fs::write(path, to_text(model))
        .map_err(|e| CliError::invalid(format!("cannot write {}: {e}", path.display())))
}

pub fn load(path: &Path) -> CliResult<RVineModel> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::invalid(format!("cannot read {}: {e}", path.display())))?;
    from_text(&text).map_err(|e| CliError::invalid(format!("{}: {e}", path.display())))
}
