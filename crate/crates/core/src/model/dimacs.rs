use std::collections::HashMap;

use super::{check_clause, FeatureModel};
use crate::{Error, Result};

/// Parses DIMACS CNF.
///
/// Comment lines start with `c`; a comment of the form `c i <index> <name>`
/// names variable `<index>`. Unnamed variables are called `f<index>`.
/// Exactly one `p cnf <n> <m>` header must precede the clauses, which are
/// zero-terminated and may span lines. Errors carry the 1-based line number.
pub fn parse_dimacs(text: &str) -> Result<FeatureModel> {
    let mut header: Option<(usize, usize)> = None;
    let mut names: HashMap<usize, (String, usize)> = HashMap::new();
    let mut clauses: Vec<Vec<i32>> = Vec::new();
    let mut current: Vec<i32> = Vec::new();
    let mut clause_start = 0;
    let mut last_line = 0;

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        last_line = line_no;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if line == "c" || line.starts_with("c ") || line.starts_with("c\t") {
            parse_comment(line, line_no, &mut names)?;
            continue;
        }
        if line.starts_with('%') {
            break;
        }
        if line.starts_with('p') {
            if header.is_some() {
                return Err(Error::parse(line_no, "duplicate problem header"));
            }
            let toks: Vec<&str> = line.split_whitespace().collect();
            if toks.len() != 4 || toks[0] != "p" || toks[1] != "cnf" {
                return Err(Error::parse(line_no, "malformed header, expected `p cnf <n> <m>`"));
            }
            let n = toks[2]
                .parse::<usize>()
                .map_err(|_| Error::parse(line_no, "malformed feature count in header"))?;
            let m = toks[3]
                .parse::<usize>()
                .map_err(|_| Error::parse(line_no, "malformed clause count in header"))?;
            if n > i32::MAX as usize {
                return Err(Error::parse(line_no, "feature count too large"));
            }
            header = Some((n, m));
            continue;
        }
        let Some((n, _)) = header else {
            return Err(Error::parse(line_no, "clause before `p cnf` header"));
        };
        for tok in line.split_whitespace() {
            let lit: i32 = tok
                .parse()
                .map_err(|_| Error::parse(line_no, format!("malformed literal {tok:?}")))?;
            if current.is_empty() {
                clause_start = line_no;
            }
            if lit == 0 {
                if current.is_empty() {
                    return Err(Error::parse(line_no, "empty clause"));
                }
                let clause = std::mem::take(&mut current);
                check_clause(&clause, n).map_err(|e| Error::parse(clause_start, e.to_string()))?;
                clauses.push(clause);
            } else {
                if lit.unsigned_abs() as usize > n {
                    return Err(Error::parse(
                        line_no,
                        format!("literal {lit} out of range 1..={n}"),
                    ));
                }
                current.push(lit);
            }
        }
    }

    let Some((n, m)) = header else {
        return Err(Error::parse(last_line.max(1), "missing `p cnf` header"));
    };
    if !current.is_empty() {
        return Err(Error::parse(clause_start, "clause not terminated by 0"));
    }
    if clauses.len() != m {
        return Err(Error::parse(
            last_line.max(1),
            format!("header declares {m} clauses, found {}", clauses.len()),
        ));
    }

    let mut features = super::default_names(n);
    for (index, (name, line_no)) in names {
        if index == 0 || index > n {
            return Err(Error::parse(
                line_no,
                format!("named variable {index} out of range 1..={n}"),
            ));
        }
        features[index - 1] = name;
    }
    FeatureModel::new(features, clauses).map_err(|e| Error::parse(last_line.max(1), e.to_string()))
}

fn parse_comment(
    line: &str,
    line_no: usize,
    names: &mut HashMap<usize, (String, usize)>,
) -> Result<()> {
    let mut toks = line.splitn(4, char::is_whitespace);
    toks.next();
    if toks.next() != Some("i") {
        return Ok(());
    }
    let (Some(index), Some(name)) = (toks.next(), toks.next()) else {
        return Ok(());
    };
    let Ok(index) = index.parse::<usize>() else {
        return Ok(());
    };
    let name = name.trim();
    if name.is_empty() {
        return Ok(());
    }
    if names.insert(index, (name.to_string(), line_no)).is_some() {
        return Err(Error::parse(line_no, format!("variable {index} named twice")));
    }
    Ok(())
}
