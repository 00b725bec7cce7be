//! Plain-text model file.
//!
//! ```text
//! quotus-completion-model 1
//! lambda <f64>
//! rank <r>
//! iterations <n>
//! converged <true|false>
//! objective <k>
//! <k lines, one value each>
//! D <r>
//! <r values on one line>
//! U <rows> <r>
//! <rows lines of r values>
//! V <cols> <r>
//! <cols lines of r values>
//! ```
//!
//! Values use Rust's shortest round-trip formatting, so reading a written
//! model reproduces it bit for bit.

use std::fmt::Write as _;
use std::path::Path;

use nalgebra::{DMatrix, DVector};

use crate::complete::solver::CompletionModel;
use crate::error::{Error, Result};

const MAGIC: &str = "quotus-completion-model 1";

pub fn to_text(m: &CompletionModel) -> String {
    let mut s = String::new();
    let r = m.rank();
    let _ = writeln!(s, "{MAGIC}");
    let _ = writeln!(s, "lambda {:?}", m.lambda);
    let _ = writeln!(s, "rank {r}");
    let _ = writeln!(s, "iterations {}", m.iterations);
    let _ = writeln!(s, "converged {}", m.converged);
    let _ = writeln!(s, "objective {}", m.objective.len());
    for v in &m.objective {
        let _ = writeln!(s, "{v:?}");
    }
    let _ = writeln!(s, "D {r}");
    let _ = writeln!(s, "{}", join(m.d.iter()));
    for (name, mat) in [("U", &m.u), ("V", &m.v)] {
        let _ = writeln!(s, "{name} {} {}", mat.nrows(), mat.ncols());
        for row in mat.row_iter() {
            let _ = writeln!(s, "{}", join(row.iter()));
        }
    }
    s
}

fn join<'a>(vals: impl Iterator<Item = &'a f64>) -> String {
    vals.map(|v| format!("{v:?}")).collect::<Vec<_>>().join(" ")
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
    line: usize,
}

impl<'a> Lines<'a> {
    fn next(&mut self) -> Result<&'a str> {
        let (i, l) = self.inner.next().ok_or(Error::ModelFormat {
            line: self.line + 1,
            message: "unexpected end of file".into(),
        })?;
        self.line = i + 1;
        Ok(l)
    }

    fn err(&self, message: impl Into<String>) -> Error {
        Error::ModelFormat {
            line: self.line,
            message: message.into(),
        }
    }

    fn header(&mut self, key: &str, count: usize) -> Result<Vec<&'a str>> {
        let l = self.next()?;
        let parts: Vec<&str> = l.split_whitespace().collect();
        if parts.first() != Some(&key) || parts.len() != count + 1 {
            return Err(self.err(format!("expected `{key}` header")));
        }
        Ok(parts[1..].to_vec())
    }

    fn parse<T: std::str::FromStr>(&self, s: &str) -> Result<T> {
        s.parse().map_err(|_| self.err(format!("cannot parse {s:?}")))
    }

    fn scalar<T: std::str::FromStr>(&mut self, key: &str) -> Result<T> {
        let h = self.header(key, 1)?;
        self.parse(h[0])
    }

    fn row(&mut self, width: usize) -> Result<Vec<f64>> {
        let l = self.next()?;
        let vals: Vec<f64> = l.split_whitespace().map(|t| self.parse(t)).collect::<Result<_>>()?;
        if vals.len() != width {
            return Err(self.err(format!("expected {width} values, found {}", vals.len())));
        }
        Ok(vals)
    }

    fn matrix(&mut self, key: &str, cols: usize) -> Result<DMatrix<f64>> {
        let h = self.header(key, 2)?;
        let (rows, c): (usize, usize) = (self.parse(h[0])?, self.parse(h[1])?);
        if c != cols {
            return Err(self.err(format!("{key} has {c} columns, rank is {cols}")));
        }
        let mut data = Vec::with_capacity(rows * cols);
        for _ in 0..rows {
            data.extend(self.row(cols)?);
        }
        Ok(DMatrix::from_row_slice(rows, cols, &data))
    }
}

pub fn from_text(text: &str) -> Result<CompletionModel> {
    let mut it = Lines {
        inner: text.lines().enumerate(),
        line: 0,
    };
    if it.next()? != MAGIC {
        return Err(it.err("not a completion model file"));
    }
    let lambda: f64 = it.scalar("lambda")?;
    let rank: usize = it.scalar("rank")?;
    let iterations: usize = it.scalar("iterations")?;
    let converged: bool = it.scalar("converged")?;
    let k: usize = it.scalar("objective")?;
    let mut objective = Vec::with_capacity(k);
    for _ in 0..k {
        objective.push(it.row(1)?[0]);
    }
    let dr: usize = it.scalar("D")?;
    if dr != rank {
        return Err(it.err("D length differs from rank"));
    }
    let d = DVector::from_vec(it.row(rank)?);
    let u = it.matrix("U", rank)?;
    let v = it.matrix("V", rank)?;
    Ok(CompletionModel {
        u,
        d,
        v,
        lambda,
        objective,
        iterations,
        converged,
    })
}

pub fn write_model(path: &Path, m: &CompletionModel) -> Result<()> {
    std::fs::write(path, to_text(m)).map_err(|e| Error::io(path, e))
}

pub fn read_model(path: &Path) -> Result<CompletionModel> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    from_text(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_exact() {
        let m = CompletionModel {
            u: DMatrix::from_row_slice(3, 2, &[0.1, -0.2, 1.0 / 3.0, 0.0, 5e-300, 1.0]),
            d: DVector::from_vec(vec![2.5, 0.1 + 0.2]),
            v: DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]),
            lambda: 0.7,
            objective: vec![3.0, 2.0000000001],
            iterations: 12,
            converged: false,
        };
        let back = from_text(&to_text(&m)).unwrap();
        assert_eq!(back, m);
        let zero = CompletionModel::zero(4, 5, 9.0, 1.5);
        assert_eq!(from_text(&to_text(&zero)).unwrap(), zero);
    }

    #[test]
    fn reports_bad_lines() {
        let err = from_text("quotus-completion-model 1\nlambda x\n").unwrap_err();
        assert_eq!(err.to_string(), "model file line 2: cannot parse \"x\"");
        assert!(from_text("").is_err());
    }
}
