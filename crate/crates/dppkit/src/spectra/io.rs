//! Plain-text kernel files.
//!
//! ```text
//! dpp-kernel v1 <n> <int|line|plane>
//! <one label per line>
//! <n*n lines of "re im", row-major>
//! ```

use std::fmt::Write as _;

use super::kernel::{KernelMatrix, Labels};
use crate::error::{Error, Result};
use crate::linalg::{CMat, C64};

pub fn write_kernel(k: &KernelMatrix) -> String {
    let n = k.len();
    let mut s = format!("dpp-kernel v1 {n} {}\n", k.labels().kind());
    match k.labels() {
        Labels::Integers(v) => v.iter().for_each(|x| writeln!(s, "{x}").unwrap()),
        Labels::Line(v) => v.iter().for_each(|x| writeln!(s, "{x:.16e}").unwrap()),
        Labels::Plane(v) => v.iter().for_each(|(x, y)| writeln!(s, "{x:.16e} {y:.16e}").unwrap()),
    }
    for z in k.entries().data() {
        writeln!(s, "{:.16e} {:.16e}", z.re, z.im).unwrap();
    }
    s
}

pub fn read_kernel(text: &str) -> Result<KernelMatrix> {
    let bad = |m: &str| Error::Domain(format!("kernel file: {m}"));
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().ok_or_else(|| bad("empty"))?.split_whitespace().collect();
    if header.len() != 4 || header[0] != "dpp-kernel" || header[1] != "v1" {
        return Err(bad("bad header"));
    }
    let n: usize = header[2].parse().map_err(|_| bad("bad size"))?;
    let num = |t: &str| t.parse::<f64>().map_err(|_| bad("bad number"));
    let mut label_lines = Vec::with_capacity(n);
    for _ in 0..n {
        label_lines.push(lines.next().ok_or_else(|| bad("truncated labels"))?);
    }
    let labels = match header[3] {
        "int" => Labels::Integers(
            label_lines.iter().map(|l| l.trim().parse().map_err(|_| bad("bad label"))).collect::<Result<_>>()?,
        ),
        "line" => Labels::Line(label_lines.iter().map(|l| num(l.trim())).collect::<Result<_>>()?),
        "plane" => Labels::Plane(
            label_lines
                .iter()
                .map(|l| {
                    let p: Vec<&str> = l.split_whitespace().collect();
                    if p.len() != 2 {
                        return Err(bad("bad planar label"));
                    }
                    Ok((num(p[0])?, num(p[1])?))
                })
                .collect::<Result<_>>()?,
        ),
        _ => return Err(bad("unknown label kind")),
    };
    let mut data = Vec::with_capacity(n * n);
    for _ in 0..n * n {
        let l = lines.next().ok_or_else(|| bad("truncated entries"))?;
        let p: Vec<&str> = l.split_whitespace().collect();
        if p.len() != 2 {
            return Err(bad("bad entry"));
        }
        data.push(C64::new(num(p[0])?, num(p[1])?));
    }
    let entries = CMat::from_fn(n, n, |i, j| data[i * n + j]);
    KernelMatrix::new(labels, entries)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectra::{build_toeplitz_kernel, Symbol};

    #[test]
    fn round_trip_is_exact() {
        let s = Symbol::trig_poly(&[(0, C64::new(0.5, 0.0)), (1, C64::new(0.1, 0.2 / 3.0))]).unwrap();
        let k = build_toeplitz_kernel(&s, -3..=4).unwrap();
        let back = read_kernel(&write_kernel(&k)).unwrap();
        assert_eq!(back.entries(), k.entries());
        assert_eq!(back.labels(), k.labels());
        assert_eq!(back.id(), k.id());
    }

    #[test]
    fn rejects_garbage() {
        assert!(read_kernel("dpp-kernel v2 1 int\n0\n1 0\n").is_err());
        assert!(read_kernel("dpp-kernel v1 2 int\n0\n1\n1 0\n").is_err());
    }
}
