//! Plain-text sparse dump of an [`SdpProblem`] for cross-checking against
//! external solvers.
//!
//! ```text
//! # nvars 3
//! # objective 1 0 1
//! # bound 0 0 none
//! # block 0 dim 2
//! 0 0 0 0 -1
//! 0 1 0 0 1
//! ```
//!
//! Data lines are `constraint var row col value` with `var = 0` for the
//! constant matrix and `var = k + 1` for the coefficient of `y_k`; only the
//! upper triangle (`row ≤ col`) is written. Bound lines are
//! `# bound var lower upper` with `none` for a missing side.

use std::io::{BufRead, Write};

use super::{LmiConstraint, SdpError, SdpProblem, VarBound};
use crate::scalar::Real;
use crate::symmat::{Mat, SymMatrix};

pub fn write_triplets<T: Real, W: Write>(problem: &SdpProblem<T>, mut out: W) -> std::io::Result<()> {
    writeln!(out, "# nvars {}", problem.nvars())?;
    let obj: Vec<String> = problem.objective().iter().map(|c| format!("{c:e}")).collect();
    writeln!(out, "# objective {}", obj.join(" "))?;
    let side = |v: Option<T>| v.map_or_else(|| "none".to_string(), |x| format!("{x:e}"));
    for (k, b) in problem.var_bounds().iter().enumerate() {
        if b.lower.is_some() || b.upper.is_some() {
            writeln!(out, "# bound {k} {} {}", side(b.lower), side(b.upper))?;
        }
    }
    for (j, c) in problem.constraints().iter().enumerate() {
        writeln!(out, "# block {j} dim {}", c.dim())?;
        let mats = std::iter::once((0, &c.constant)).chain(c.terms.iter().map(|(k, f)| (k + 1, f)));
        for (var, m) in mats {
            for r in 0..m.dim() {
                for col in r..m.dim() {
                    let v = m[(r, col)];
                    if v != T::zero() {
                        writeln!(out, "{j} {var} {r} {col} {v:e}")?;
                    }
                }
            }
        }
    }
    Ok(())
}

fn parse_err(line: usize, msg: impl Into<String>) -> SdpError {
    SdpError::Parse {
        line,
        msg: msg.into(),
    }
}

fn num<T: Real>(tok: &str, line: usize) -> Result<T, SdpError> {
    tok.parse::<f64>()
        .map(T::lit)
        .map_err(|_| parse_err(line, format!("bad number {tok:?}")))
}

fn idx(tok: &str, line: usize) -> Result<usize, SdpError> {
    tok.parse::<usize>()
        .map_err(|_| parse_err(line, format!("bad index {tok:?}")))
}

pub fn read_triplets<T: Real, R: BufRead>(input: R) -> Result<SdpProblem<T>, SdpError> {
    let mut nvars = None;
    let mut objective = None;
    let mut bounds: Vec<(usize, VarBound<T>)> = Vec::new();
    let mut dims: Vec<usize> = Vec::new();
    // (constraint, var) -> dense matrix
    let mut entries: Vec<Vec<Option<Mat<T>>>> = Vec::new();
    for (ln, line) in input.lines().enumerate() {
        let ln = ln + 1;
        let line = line.map_err(|e| parse_err(ln, e.to_string()))?;
        let toks: Vec<&str> = line.split_whitespace().collect();
        if toks.is_empty() {
            continue;
        }
        if toks[0] == "#" {
            match toks.get(1).copied() {
                Some("nvars") => {
                    let n = idx(toks.get(2).ok_or_else(|| parse_err(ln, "missing count"))?, ln)?;
                    nvars = Some(n);
                }
                Some("objective") => {
                    objective = Some(
                        toks[2..]
                            .iter()
                            .map(|t| num(t, ln))
                            .collect::<Result<Vec<T>, _>>()?,
                    );
                }
                Some("bound") if toks.len() == 5 => {
                    let side = |t: &str| -> Result<Option<T>, SdpError> {
                        if t == "none" {
                            Ok(None)
                        } else {
                            num(t, ln).map(Some)
                        }
                    };
                    bounds.push((
                        idx(toks[2], ln)?,
                        VarBound {
                            lower: side(toks[3])?,
                            upper: side(toks[4])?,
                        },
                    ));
                }
                Some("block") if toks.len() == 5 && toks[3] == "dim" => {
                    let j = idx(toks[2], ln)?;
                    if j != dims.len() {
                        return Err(parse_err(ln, "blocks must be numbered consecutively"));
                    }
                    let d = idx(toks[4], ln)?;
                    if d == 0 {
                        return Err(parse_err(ln, "block dimension must be positive"));
                    }
                    dims.push(d);
                    entries.push(Vec::new());
                }
                _ => {}
            }
            continue;
        }
        if toks.len() != 5 {
            return Err(parse_err(ln, format!("expected 5 fields, found {}", toks.len())));
        }
        let n = nvars.ok_or_else(|| parse_err(ln, "data before '# nvars'"))?;
        let (j, var, r, c) = (idx(toks[0], ln)?, idx(toks[1], ln)?, idx(toks[2], ln)?, idx(toks[3], ln)?);
        let v: T = num(toks[4], ln)?;
        let d = *dims.get(j).ok_or_else(|| parse_err(ln, format!("undeclared block {j}")))?;
        if var > n {
            return Err(parse_err(ln, format!("variable {var} out of range")));
        }
        if r >= d || c >= d {
            return Err(parse_err(ln, format!("entry ({r},{c}) outside block of dim {d}")));
        }
        let row = &mut entries[j];
        if row.len() <= var {
            row.resize(var + 1, None);
        }
        let m = row[var].get_or_insert_with(|| Mat::zeros(d, d));
        m[(r, c)] = v;
        m[(c, r)] = v;
    }
    let n = nvars.ok_or_else(|| parse_err(0, "missing '# nvars' header"))?;
    let objective = objective.unwrap_or_else(|| vec![T::zero(); n]);
    let constraints = dims
        .iter()
        .zip(entries)
        .map(|(&d, mats)| {
            let mut it = mats.into_iter();
            let constant = it
                .next()
                .flatten()
                .map_or_else(|| SymMatrix::zeros(d), |m| SymMatrix::symmetrize(&m));
            let mut c = LmiConstraint::new(constant);
            for (k, m) in it.enumerate() {
                if let Some(m) = m {
                    c = c.with_term(k, SymMatrix::symmetrize(&m));
                }
            }
            c
        })
        .collect();
    let mut problem = SdpProblem::new(n, objective, constraints)?;
    if !bounds.is_empty() {
        let mut vb = vec![VarBound::default(); n];
        for (k, b) in bounds {
            if k >= n {
                return Err(SdpError::Argument(format!("bound on variable {k} out of range")));
            }
            vb[k] = b;
        }
        problem = problem.with_bounds(vb)?;
    }
    Ok(problem)
}
