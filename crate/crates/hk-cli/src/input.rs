//! Text inputs: polynomial lists, exponent tuples, points and `@file` references.

use hk::exponents::Exponent;
use hk::field::parse_coeff;
use hk::series::{parse, Series, SeriesError};
use hk::{Coeff, FieldSpec};

use crate::CliError;

/// Reads `@path` arguments from disk and returns inline text unchanged.
pub fn load(arg: &str) -> Result<String, CliError> {
    match arg.strip_prefix('@') {
        Some(path) => std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_string(), source }),
        None => Ok(arg.to_string()),
    }
}

/// A polynomial source fragment with its 1-based position in the input.
#[derive(Debug, Clone)]
pub struct Piece {
    pub text: String,
    pub line: usize,
    pub column: usize,
}

/// Splits on commas and newlines, dropping blanks and `#` comments.
pub fn pieces(text: &str) -> Vec<Piece> {
    let mut out = Vec::new();
    for (l, line) in text.lines().enumerate() {
        let body = line.split('#').next().unwrap_or("");
        let mut start = 0;
        for part in body.split(',') {
            if !part.trim().is_empty() {
                out.push(Piece { text: part.to_string(), line: l + 1, column: start + 1 });
            }
            start += part.len() + 1;
        }
    }
    out
}

/// Variable counts implied by the names used: `(main, parameters)`.
pub fn infer_vars(texts: &[&str]) -> (usize, usize) {
    let (mut main, mut param, mut xyz) = (0, 0, 0);
    for text in texts {
        let mut chars = text.chars().peekable();
        while let Some(c) = chars.next() {
            if !c.is_ascii_alphabetic() {
                continue;
            }
            let mut digits = String::new();
            while let Some(d) = chars.peek().filter(|d| d.is_ascii_digit()) {
                digits.push(*d);
                chars.next();
            }
            let k: Option<usize> = digits.parse().ok();
            match (c, k) {
                ('x', Some(k)) => main = main.max(k),
                ('v', Some(k)) => param = param.max(k),
                ('v', None) => param = param.max(1),
                ('x', None) => xyz = xyz.max(1),
                ('y', None) => xyz = xyz.max(2),
                ('z', None) => xyz = xyz.max(3),
                _ => {}
            }
        }
    }
    (main.max(xyz).max(1), param)
}

pub fn polys(text: &str, field: FieldSpec, n: usize, m: usize, trunc: u32) -> Result<Vec<Series>, CliError> {
    let mut out = Vec::new();
    for piece in pieces(text) {
        let series = parse(&piece.text, field, n, m, trunc).map_err(|err| match err {
            SeriesError::Parse { column, message } => {
                CliError::Parse { line: piece.line, column: piece.column + column.saturating_sub(1), message }
            }
            other => other.into(),
        })?;
        out.push(series);
    }
    if out.is_empty() {
        return Err(CliError::Usage("no polynomials given".into()));
    }
    Ok(out)
}

/// `"(2,0),(0,3)"` or `"2,0; 0,3"`.
pub fn exponents(text: &str) -> Result<Vec<Exponent>, CliError> {
    let groups: Vec<String> = if text.contains('(') {
        text.split('(').skip(1).map(|g| g.split(')').next().unwrap_or("").to_string()).collect()
    } else {
        text.split(';').map(str::to_string).collect()
    };
    let mut out = Vec::new();
    for g in groups.iter().filter(|g| !g.trim().is_empty()) {
        let coords = g
            .split(',')
            .map(|c| c.trim().parse::<u32>().map_err(|_| CliError::Usage(format!("bad exponent `{}`", g.trim()))))
            .collect::<Result<Vec<u32>, _>>()?;
        out.push(Exponent::new(coords));
    }
    if out.is_empty() {
        return Err(CliError::Usage("no exponents given".into()));
    }
    Ok(out)
}

/// `"0,1/2,-3"`, or the origin when absent.
pub fn point(text: Option<&str>, field: FieldSpec, n: usize) -> Result<Vec<Coeff>, CliError> {
    let Some(text) = text else { return Ok(vec![field.zero(); n]) };
    let coords = text
        .split(',')
        .map(|c| {
            let v = parse_coeff(c).ok_or_else(|| CliError::Usage(format!("bad coordinate `{}`", c.trim())))?;
            field.reduce(&v).map_err(CliError::from)
        })
        .collect::<Result<Vec<_>, _>>()?;
    if coords.len() != n {
        return Err(CliError::Usage(format!("point has {} coordinates, expected {n}", coords.len())));
    }
    Ok(coords)
}

pub fn points(text: Option<&str>, field: FieldSpec, n: usize) -> Result<Vec<Vec<Coeff>>, CliError> {
    match text {
        None => Ok(vec![vec![field.zero(); n]]),
        Some(t) => t.split(';').map(|p| point(Some(p), field, n)).collect(),
    }
}

/// Variable names or 1-based indices, comma-separated.
pub fn coordinates(text: &str, names: &[String]) -> Result<Vec<usize>, CliError> {
    text.split(',')
        .filter(|t| !t.trim().is_empty())
        .map(|t| {
            let t = t.trim();
            names
                .iter()
                .position(|n| n == t)
                .or_else(|| t.parse::<usize>().ok().filter(|&k| (1..=names.len()).contains(&k)).map(|k| k - 1))
                .ok_or_else(|| CliError::Usage(format!("unknown coordinate `{t}`")))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn variable_inference() {
        assert_eq!(infer_vars(&["x^2 - y^3"]), (2, 0));
        assert_eq!(infer_vars(&["x1 + x4*v2"]), (4, 2));
        assert_eq!(infer_vars(&["3"]), (1, 0));
    }

    #[test]
    fn positions_survive_splitting() {
        let err = polys("x^2, y^^3", FieldSpec::Rationals, 2, 0, 8).unwrap_err();
        match err {
            CliError::Parse { line, column, .. } => assert_eq!((line, column > 5), (1, true)),
            other => panic!("unexpected {other:?}"),
        }
        let ps = pieces("x\n\n# note\ny, z");
        assert_eq!(ps.iter().map(|p| (p.line, p.column)).collect::<Vec<_>>(), vec![(1, 1), (4, 1), (4, 3)]);
    }

    #[test]
    fn tuples() {
        let e = exponents("(2,0),(0,3)").unwrap();
        assert_eq!(e[1].coords(), &[0, 3]);
        assert_eq!(exponents("1; 2").unwrap().len(), 2);
        assert!(exponents("(a)").is_err());
    }
}
