//! Reader and writer for parity-check matrices in alist format.
//!
//! Layout: `n m`, the max column and row degrees, the `n` column degrees,
//! the `m` row degrees, then one line of 1-indexed row indices per column
//! followed by one line of column indices per row. Zero entries are padding.

use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::gf2::BitMatrix;

pub fn read_alist(path: impl AsRef<Path>) -> Result<BitMatrix> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: PathBuf::from(path),
        source,
    })?;
    parse_alist(&text, path)
}

pub fn parse_alist(text: &str, path: &Path) -> Result<BitMatrix> {
    let perr = |line: usize, message: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        message,
    };
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty());
    let mut next_nums = |what: &str| -> Result<(usize, Vec<usize>)> {
        let (ln, l) = lines
            .next()
            .ok_or_else(|| perr(text.lines().count(), format!("unexpected end of file reading {what}")))?;
        let nums = l
            .split_whitespace()
            .map(|t| {
                t.parse::<usize>()
                    .map_err(|_| perr(ln, format!("invalid integer `{t}` in {what}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok((ln, nums))
    };

    let (ln, dims) = next_nums("dimensions")?;
    let [n, m] = dims[..] else {
        return Err(perr(ln, "expected `n m`".into()));
    };
    let (ln, maxdeg) = next_nums("max degrees")?;
    if maxdeg.len() != 2 {
        return Err(perr(ln, "expected two maximum degrees".into()));
    }
    let (ln, col_deg) = next_nums("column degrees")?;
    if col_deg.len() != n {
        return Err(perr(ln, format!("expected {n} column degrees, found {}", col_deg.len())));
    }
    let (ln, row_deg) = next_nums("row degrees")?;
    if row_deg.len() != m {
        return Err(perr(ln, format!("expected {m} row degrees, found {}", row_deg.len())));
    }

    let mut h = BitMatrix::zeros(m, n);
    for (j, &deg) in col_deg.iter().enumerate() {
        let (ln, entries) = next_nums("column lists")?;
        let rows: Vec<usize> = entries.into_iter().filter(|&r| r != 0).collect();
        if rows.len() != deg {
            return Err(perr(ln, format!("column {} lists {} rows, degree says {deg}", j + 1, rows.len())));
        }
        for r in rows {
            if r > m {
                return Err(perr(ln, format!("row index {r} exceeds {m}")));
            }
            h.set(r - 1, j, true);
        }
    }
    for (i, &deg) in row_deg.iter().enumerate() {
        let (ln, entries) = next_nums("row lists")?;
        let cols: Vec<usize> = entries.into_iter().filter(|&c| c != 0).collect();
        if cols.len() != deg {
            return Err(perr(ln, format!("row {} lists {} columns, degree says {deg}", i + 1, cols.len())));
        }
        for c in cols {
            if c > n || !h.get(i, c - 1) {
                return Err(perr(ln, format!("row {} entry {c} disagrees with the column lists", i + 1)));
            }
        }
    }
    Ok(h)
}

pub fn to_alist(h: &BitMatrix) -> String {
    let (m, n) = (h.rows(), h.cols());
    let t = h.transpose();
    let col_lists: Vec<Vec<usize>> = t.supports();
    let row_lists: Vec<Vec<usize>> = h.supports();
    let max_col = col_lists.iter().map(Vec::len).max().unwrap_or(0);
    let max_row = row_lists.iter().map(Vec::len).max().unwrap_or(0);
    let join = |v: &[usize]| v.iter().map(usize::to_string).collect::<Vec<_>>().join(" ");
    let padded = |v: &[usize], width: usize| {
        let mut w: Vec<usize> = v.iter().map(|x| x + 1).collect();
        w.resize(width.max(1), 0);
        join(&w)
    };
    let mut out = format!("{n} {m}\n{max_col} {max_row}\n");
    out += &join(&col_lists.iter().map(Vec::len).collect::<Vec<_>>());
    out += "\n";
    out += &join(&row_lists.iter().map(Vec::len).collect::<Vec<_>>());
    out += "\n";
    for c in &col_lists {
        out += &padded(c, max_col);
        out += "\n";
    }
    for r in &row_lists {
        out += &padded(r, max_row);
        out += "\n";
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const HAMMING: &str = "7 3
3 4
1 2 3 1 2 2 1
4 4 4
1 0 0
1 2 0
1 2 3
2 0 0
1 3 0
2 3 0
3 0 0
1 2 3 5
2 3 4 6
3 5 6 7
";

    #[test]
    fn parses_hamming() {
        let h = parse_alist(HAMMING, Path::new("h.alist")).unwrap();
        assert_eq!(h, crate::css::steane().h1().clone());
    }

    #[test]
    fn writer_round_trips() {
        let h = crate::css::steane().h1().clone();
        let text = to_alist(&h);
        assert_eq!(parse_alist(&text, Path::new("x")).unwrap(), h);
        let rep = BitMatrix::from_dense(&[[1u8, 1, 0], [0, 1, 1]]).unwrap();
        assert_eq!(parse_alist(&to_alist(&rep), Path::new("x")).unwrap(), rep);
    }

    #[test]
    fn rejects_inconsistent_lists() {
        let bad = HAMMING.replace("3 5 6 7", "3 5 6 1");
        match parse_alist(&bad, Path::new("h")) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 14),
            other => panic!("{other:?}"),
        }
        let short = "7 3\n3 4\n1 1 2\n";
        assert!(matches!(
            parse_alist(short, Path::new("h")),
            Err(Error::Parse { line: 3, .. })
        ));
    }
}
