//! DIMACS CNF reading and writing, with comment legend preserved on write.

use std::io::{BufRead, Write};

use super::CnfFormula;

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum DimacsError {
    #[error("line {line}: expected 'p cnf <vars> <clauses>' header, got {text:?}")]
    BadHeader { line: usize, text: String },
    #[error("line {line}: invalid literal {text:?}")]
    BadLiteral { line: usize, text: String },
    #[error("line {line}: literal {lit} exceeds declared variable count {vars}")]
    VarOutOfRange { line: usize, lit: i32, vars: usize },
    #[error("missing 'p cnf' header")]
    MissingHeader,
    #[error("unterminated clause at end of file")]
    UnterminatedClause,
    #[error("io error: {0}")]
    Io(String),
}

/// Parses a DIMACS CNF file. Returns the formula (normalized: duplicate
/// literals dropped, tautological clauses removed) and its comment lines.
pub fn read_dimacs(reader: impl BufRead) -> Result<(CnfFormula, Vec<String>), DimacsError> {
    let mut comments = Vec::new();
    let mut formula: Option<CnfFormula> = None;
    let mut declared_vars = 0usize;
    let mut current: Vec<i32> = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| DimacsError::Io(e.to_string()))?;
        let lineno = i + 1;
        let text = line.trim();
        if text.is_empty() {
            continue;
        }
        if let Some(comment) = text.strip_prefix('c') {
            comments.push(comment.strip_prefix(' ').unwrap_or(comment).to_string());
            continue;
        }
        if text.starts_with('p') {
            let parts: Vec<&str> = text.split_whitespace().collect();
            let ok = parts.len() == 4 && parts[0] == "p" && parts[1] == "cnf";
            let header = ok
                .then(|| {
                    Some((parts[2].parse::<usize>().ok()?, parts[3].parse::<usize>().ok()?))
                })
                .flatten();
            match header {
                Some((vars, _clauses)) => {
                    declared_vars = vars;
                    formula = Some(CnfFormula::new(vars));
                }
                None => {
                    return Err(DimacsError::BadHeader { line: lineno, text: text.to_string() })
                }
            }
            continue;
        }
        let formula = formula.as_mut().ok_or(DimacsError::MissingHeader)?;
        for tok in text.split_whitespace() {
            let lit: i32 = tok
                .parse()
                .map_err(|_| DimacsError::BadLiteral { line: lineno, text: tok.to_string() })?;
            if lit == 0 {
                formula.add_clause(&current);
                current.clear();
            } else {
                if lit.unsigned_abs() as usize > declared_vars {
                    return Err(DimacsError::VarOutOfRange {
                        line: lineno,
                        lit,
                        vars: declared_vars,
                    });
                }
                current.push(lit);
            }
        }
    }
    if !current.is_empty() {
        return Err(DimacsError::UnterminatedClause);
    }
    let formula = formula.ok_or(DimacsError::MissingHeader)?;
    Ok((formula, comments))
}

/// Writes a formula in DIMACS format, comment legend first.
pub fn write_dimacs(
    f: &CnfFormula,
    comments: &[String],
    mut w: impl Write,
) -> std::io::Result<()> {
    for c in comments {
        writeln!(w, "c {}", c)?;
    }
    writeln!(w, "p cnf {} {}", f.num_vars, f.clauses.len())?;
    for clause in &f.clauses {
        for lit in clause {
            write!(w, "{} ", lit)?;
        }
        writeln!(w, "0")?;
    }
    Ok(())
}
