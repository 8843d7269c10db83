//! Plain-text block-set files.
//!
//! ```text
//! <dim> <F|P> <M> <b> <count>
//! s s s ...      (count rows of V_M symbols, canonical cell order)
//! ```

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::lattice::{LatticeBox, LatticeMode};

use super::{Alphabet, Pattern};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlockFile {
    pub alphabet: Alphabet,
    pub bx: LatticeBox,
    pub blocks: Vec<Pattern>,
}

fn perr<T>(line: usize, msg: impl Into<String>) -> Result<T> {
    Err(Error::Parse { line, msg: msg.into() })
}

pub fn read_blockset(text: &str) -> Result<BlockFile> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (hl, header) = match lines.next() {
        Some((i, l)) => (i + 1, l),
        None => return perr(1, "malformed header: empty file"),
    };
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.len() != 5 {
        return perr(hl, "malformed header: expected `<dim> <F|P> <M> <b> <count>`");
    }
    let num = |s: &str, what: &str| -> Result<u64> {
        s.parse::<u64>()
            .map_err(|_| Error::Parse { line: hl, msg: format!("malformed header: bad {what} {s:?}") })
    };
    let dim = num(fields[0], "dimension")? as usize;
    let mode = match fields[1] {
        "F" => LatticeMode::Full,
        "P" => LatticeMode::Positive,
        other => return perr(hl, format!("malformed header: mode {other:?} is not F or P")),
    };
    let m = num(fields[2], "radius")?;
    let b = num(fields[3], "alphabet size")?;
    let count = num(fields[4], "count")? as usize;
    let alphabet = Alphabet::new(b.min(u32::MAX as u64) as u32)
        .map_err(|e| Error::Parse { line: hl, msg: format!("malformed header: {e}") })?;
    let bx = LatticeBox::new(dim, mode, m)
        .map_err(|e| Error::Parse { line: hl, msg: format!("malformed header: {e}") })?;
    let v = bx
        .cell_count()
        .map_err(|e| Error::Parse { line: hl, msg: format!("malformed header: {e}") })?;

    let mut blocks = Vec::with_capacity(count.min(1 << 20));
    for (i, line) in lines {
        let ln = i + 1;
        if blocks.len() == count {
            return perr(ln, format!("more rows than the declared count {count}"));
        }
        let mut symbols = Vec::with_capacity(v);
        for tok in line.split_whitespace() {
            let s: u64 = tok
                .parse()
                .map_err(|_| Error::Parse { line: ln, msg: format!("bad symbol {tok:?}") })?;
            if s >= b {
                return Err(Error::SymbolOutOfRange { line: ln, symbol: s, b: b as u32 });
            }
            symbols.push(s as u8);
        }
        if symbols.len() != v {
            return perr(ln, format!("wrong row length: {} symbols, expected {v}", symbols.len()));
        }
        blocks.push(Pattern { bx, alphabet, symbols });
    }
    if blocks.len() != count {
        return perr(hl, format!("header declares {count} rows, found {}", blocks.len()));
    }
    Ok(BlockFile { alphabet, bx, blocks })
}

/// Deterministic: rows sorted lexicographically by symbol array.
pub fn write_blockset(file: &BlockFile) -> String {
    let mut rows: Vec<&Vec<u8>> = file.blocks.iter().map(|p| &p.symbols).collect();
    rows.sort();
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{} {} {} {} {}",
        file.bx.dim,
        file.bx.mode.letter(),
        file.bx.radius,
        file.alphabet.size(),
        rows.len()
    );
    for r in rows {
        let line: Vec<String> = r.iter().map(|s| s.to_string()).collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_two_blocks() {
        let f = read_blockset("1 P 1 2 2\n0 1\n1 0\n").unwrap();
        assert_eq!(f.alphabet.size(), 2);
        assert_eq!(f.bx.width(), 2);
        let rows: Vec<_> = f.blocks.iter().map(|p| p.symbols.clone()).collect();
        assert_eq!(rows, vec![vec![0, 1], vec![1, 0]]);
    }

    #[test]
    fn round_trip_sorts() {
        let f = read_blockset("1 P 1 2 2\n1 0\n0 1\n").unwrap();
        let text = write_blockset(&f);
        assert_eq!(text, "1 P 1 2 2\n0 1\n1 0\n");
        let g = read_blockset(&text).unwrap();
        assert_eq!(write_blockset(&g), text);
    }

    #[test]
    fn errors() {
        let e = read_blockset("1 P 1 2 1\n0 2\n").unwrap_err();
        assert!(e.to_string().contains("symbol out of range"), "{e}");
        assert!(matches!(read_blockset("1 Q 1 2 1\n0 1\n"), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(read_blockset("1 P 1\n"), Err(Error::Parse { .. })));
        let e = read_blockset("1 P 1 2 1\n0 1 1\n").unwrap_err();
        assert!(e.to_string().contains("wrong row length"), "{e}");
        assert!(read_blockset("1 P 1 2 3\n0 1\n").is_err());
        assert!(read_blockset("").is_err());
    }
}
