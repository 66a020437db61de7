//! MatrixMarket coordinate format reader and writer.

use std::fmt::Write as _;

use num_complex::Complex64;
use thiserror::Error;

use super::SparseMatrix;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseErrorKind {
    #[error("malformed header: {0}")]
    MalformedHeader(String),
    #[error("unsupported format: {0}")]
    Unsupported(String),
    #[error("malformed size line: {0}")]
    MalformedSize(String),
    #[error("index out of bounds: {0}")]
    IndexOutOfBounds(String),
    #[error("non-numeric value: {0}")]
    NonNumeric(String),
    #[error("wrong number of entries: {0}")]
    EntryCount(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {kind}")]
pub struct ParseError {
    pub line: usize,
    pub kind: ParseErrorKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Field {
    Real,
    Integer,
    Complex,
    Pattern,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Symmetry {
    General,
    Symmetric,
    SkewSymmetric,
    Hermitian,
}

/// A parsed matrix; complex files stay complex.
#[derive(Debug, Clone, PartialEq)]
pub enum MatrixMarket {
    Real(SparseMatrix<f64>),
    Complex(SparseMatrix<Complex64>),
}

impl MatrixMarket {
    pub fn into_real(self) -> Option<SparseMatrix<f64>> {
        match self {
            MatrixMarket::Real(m) => Some(m),
            MatrixMarket::Complex(_) => None,
        }
    }
}

fn err(line: usize, kind: ParseErrorKind) -> ParseError {
    ParseError { line, kind }
}

pub fn parse_matrix_market(text: &[u8]) -> Result<MatrixMarket, ParseError> {
    let text = std::str::from_utf8(text)
        .map_err(|e| err(1, ParseErrorKind::MalformedHeader(format!("not UTF-8: {e}"))))?;
    let mut lines = text.lines().enumerate().map(|(k, l)| (k + 1, l));

    let (hline, header) = lines
        .next()
        .ok_or_else(|| err(1, ParseErrorKind::MalformedHeader("empty input".into())))?;
    let tokens: Vec<String> = header.split_whitespace().map(str::to_ascii_lowercase).collect();
    if tokens.len() != 5 || tokens[0] != "%%matrixmarket" || tokens[1] != "matrix" {
        return Err(err(hline, ParseErrorKind::MalformedHeader(header.trim().to_string())));
    }
    if tokens[2] != "coordinate" {
        return Err(err(hline, ParseErrorKind::Unsupported(format!("format {:?}", tokens[2]))));
    }
    let field = match tokens[3].as_str() {
        "real" | "double" => Field::Real,
        "integer" => Field::Integer,
        "complex" => Field::Complex,
        "pattern" => Field::Pattern,
        other => return Err(err(hline, ParseErrorKind::MalformedHeader(format!("field {other:?}")))),
    };
    let symmetry = match tokens[4].as_str() {
        "general" => Symmetry::General,
        "symmetric" => Symmetry::Symmetric,
        "skew-symmetric" => Symmetry::SkewSymmetric,
        "hermitian" => Symmetry::Hermitian,
        other => return Err(err(hline, ParseErrorKind::MalformedHeader(format!("symmetry {other:?}")))),
    };

    let mut body = lines.filter(|(_, l)| {
        let t = l.trim_start();
        !t.is_empty() && !t.starts_with('%')
    });
    let (sline, size) = body
        .next()
        .ok_or_else(|| err(hline + 1, ParseErrorKind::MalformedSize("missing size line".into())))?;
    let dims: Vec<usize> = size
        .split_whitespace()
        .map(|t| t.parse::<usize>())
        .collect::<Result<_, _>>()
        .map_err(|_| err(sline, ParseErrorKind::MalformedSize(size.trim().to_string())))?;
    let [m, n, nnz] = dims[..] else {
        return Err(err(sline, ParseErrorKind::MalformedSize(size.trim().to_string())));
    };

    let mut entries: Vec<(usize, usize, Complex64)> = Vec::with_capacity(nnz);
    let mut last_line = sline;
    let mut read = 0;
    for (lno, l) in body {
        last_line = lno;
        if read == nnz {
            return Err(err(lno, ParseErrorKind::EntryCount(format!("more than {nnz} entries"))));
        }
        let toks: Vec<&str> = l.split_whitespace().collect();
        let want = match field {
            Field::Pattern => 2,
            Field::Real | Field::Integer => 3,
            Field::Complex => 4,
        };
        if toks.len() != want {
            return Err(err(
                lno,
                ParseErrorKind::NonNumeric(format!("expected {want} fields, got {:?}", l.trim())),
            ));
        }
        let idx = |t: &str| -> Result<usize, ParseError> {
            t.parse::<usize>()
                .map_err(|_| err(lno, ParseErrorKind::NonNumeric(format!("index {t:?}"))))
        };
        let (i, j) = (idx(toks[0])?, idx(toks[1])?);
        if i == 0 || j == 0 || i > m || j > n {
            return Err(err(
                lno,
                ParseErrorKind::IndexOutOfBounds(format!("({i}, {j}) in a {m}x{n} matrix")),
            ));
        }
        let num = |t: &str| -> Result<f64, ParseError> {
            let v = t
                .parse::<f64>()
                .map_err(|_| err(lno, ParseErrorKind::NonNumeric(format!("value {t:?}"))))?;
            if v.is_finite() {
                Ok(v)
            } else {
                Err(err(lno, ParseErrorKind::NonNumeric(format!("value {t:?} is not finite"))))
            }
        };
        let v = match field {
            Field::Pattern => Complex64::new(1.0, 0.0),
            Field::Real | Field::Integer => Complex64::new(num(toks[2])?, 0.0),
            Field::Complex => Complex64::new(num(toks[2])?, num(toks[3])?),
        };
        let (i, j) = (i - 1, j - 1);
        read += 1;
        entries.push((i, j, v));
        if i != j {
            match symmetry {
                Symmetry::General => {}
                Symmetry::Symmetric => entries.push((j, i, v)),
                Symmetry::SkewSymmetric => entries.push((j, i, -v)),
                Symmetry::Hermitian => entries.push((j, i, v.conj())),
            }
        }
    }
    if read != nnz {
        return Err(err(
            last_line,
            ParseErrorKind::EntryCount(format!("header promises {nnz}, found {read}")),
        ));
    }
    let shape_err = |e: crate::Error| err(sline, ParseErrorKind::IndexOutOfBounds(e.to_string()));
    if field == Field::Complex {
        SparseMatrix::from_triplets(m, n, &entries)
            .map(MatrixMarket::Complex)
            .map_err(shape_err)
    } else {
        let real: Vec<(usize, usize, f64)> = entries.into_iter().map(|(i, j, v)| (i, j, v.re)).collect();
        SparseMatrix::from_triplets(m, n, &real)
            .map(MatrixMarket::Real)
            .map_err(shape_err)
    }
}

/// Writes a real matrix as `coordinate real general`.
pub fn write_matrix_market(a: &SparseMatrix<f64>) -> String {
    let mut s = String::new();
    s.push_str("%%MatrixMarket matrix coordinate real general\n");
    let _ = writeln!(s, "{} {} {}", a.n_rows(), a.n_cols(), a.nnz());
    for (i, j, v) in a.triplets() {
        let _ = writeln!(s, "{} {} {:e}", i + 1, j + 1, v);
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn real(text: &str) -> SparseMatrix<f64> {
        parse_matrix_market(text.as_bytes()).unwrap().into_real().unwrap()
    }

    #[test]
    fn single_entry() {
        let a = real("%%MatrixMarket matrix coordinate real general\n1 1 1\n1 1 2.5\n");
        assert_eq!((a.n_rows(), a.nnz()), (1, 1));
        assert_eq!(a.get(0, 0), Some(2.5));
    }

    #[test]
    fn symmetric_is_expanded() {
        let a = real("%%MatrixMarket matrix coordinate real symmetric\n% comment\n2 2 3\n1 1 1\n2 1 3\n2 2 1\n");
        assert_eq!(a.get(0, 1), Some(3.0));
        assert_eq!(a.get(1, 0), Some(3.0));
        assert_eq!(a.nnz(), 4);
    }

    #[test]
    fn duplicates_are_summed() {
        let text = "%%MatrixMarket matrix coordinate real general\n2 2 3\n1 1 1\n1 1 2\n2 2 5\n";
        let a = real(text);
        // Oracle: accumulate coordinates into a dense array.
        let mut dense = [[0.0f64; 2]; 2];
        for l in text.lines().skip(2) {
            let t: Vec<&str> = l.split_whitespace().collect();
            let (i, j): (usize, usize) = (t[0].parse().unwrap(), t[1].parse().unwrap());
            dense[i - 1][j - 1] += t[2].parse::<f64>().unwrap();
        }
        assert_eq!(a.nnz(), 2);
        for i in 0..2 {
            for j in 0..2 {
                assert_eq!(a.get(i, j).unwrap_or(0.0), dense[i][j]);
            }
        }
    }

    #[test]
    fn pattern_and_complex() {
        let p = real("%%MatrixMarket matrix coordinate pattern general\n2 2 2\n1 2\n2 1\n");
        assert_eq!(p.get(0, 1), Some(1.0));
        let c = parse_matrix_market(b"%%MatrixMarket matrix coordinate complex hermitian\n2 2 2\n1 1 1 0\n2 1 1 2\n").unwrap();
        let MatrixMarket::Complex(c) = c else { panic!("expected complex") };
        assert_eq!(c.get(0, 1), Some(Complex64::new(1.0, -2.0)));
    }

    #[test]
    fn errors_are_distinct_and_carry_lines() {
        let e = parse_matrix_market(b"%%MatrixMarket tensor coordinate real general\n").unwrap_err();
        assert!(matches!(e.kind, ParseErrorKind::MalformedHeader(_)));
        assert_eq!(e.line, 1);

        let e = parse_matrix_market(b"%%MatrixMarket matrix coordinate real general\n2 2 1\n3 1 1.0\n").unwrap_err();
        assert!(matches!(e.kind, ParseErrorKind::IndexOutOfBounds(_)));
        assert_eq!(e.line, 3);

        let e = parse_matrix_market(b"%%MatrixMarket matrix coordinate real general\n2 2 2\n1 1 1.0\n% c\n2 2 abc\n").unwrap_err();
        assert!(matches!(e.kind, ParseErrorKind::NonNumeric(_)));
        assert_eq!(e.line, 5);

        let e = parse_matrix_market(b"%%MatrixMarket matrix coordinate real general\n2 2 2\n1 1 1.0\n").unwrap_err();
        assert!(matches!(e.kind, ParseErrorKind::EntryCount(_)));
    }

    #[test]
    fn writer_round_trips() {
        let a = real("%%MatrixMarket matrix coordinate real general\n3 3 3\n1 1 1.5\n3 2 -2\n2 3 4\n");
        assert_eq!(real(&write_matrix_market(&a)), a);
    }
}
