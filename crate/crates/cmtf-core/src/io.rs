//! Plain-text serialization for tensors, matrices, and key=value manifests.
//!
//! Tensor format: line 1 `tensor`, line 2 the order N, line 3 the shape as
//! space-separated integers, then one value per line in storage order.
//! Matrix format: line 1 `matrix`, line 2 `rows cols`, then one value per
//! line column by column. Floats carry 17 significant digits, so round
//! trips are exact.

use crate::tensor::{DenseTensor, Matrix};
use crate::{CmtfError, Result};
use std::fmt::Write as _;
use std::path::Path;

fn fmt_value(v: f64) -> String {
    format!("{:.16e}", v)
}

pub fn format_tensor(t: &DenseTensor) -> String {
    let mut out = String::new();
    out.push_str("tensor\n");
    writeln!(out, "{}", t.order()).unwrap();
    let shape: Vec<String> = t.shape().iter().map(|d| d.to_string()).collect();
    writeln!(out, "{}", shape.join(" ")).unwrap();
    for &v in t.data() {
        writeln!(out, "{}", fmt_value(v)).unwrap();
    }
    out
}

pub fn format_matrix(m: &Matrix) -> String {
    let mut out = String::new();
    out.push_str("matrix\n");
    writeln!(out, "{} {}", m.rows(), m.cols()).unwrap();
    for &v in m.data() {
        writeln!(out, "{}", fmt_value(v)).unwrap();
    }
    out
}

fn parse_err(msg: impl Into<String>) -> CmtfError {
    CmtfError::Parse(msg.into())
}

fn parse_values<'a>(lines: impl Iterator<Item = &'a str>, expect: usize) -> Result<Vec<f64>> {
    let mut data = Vec::with_capacity(expect);
    for line in lines {
        if line.is_empty() {
            continue;
        }
        let v: f64 = line
            .parse()
            .map_err(|_| parse_err(format!("bad value {:?}", line)))?;
        data.push(v);
    }
    if data.len() != expect {
        return Err(parse_err(format!(
            "expected {} values, found {}",
            expect,
            data.len()
        )));
    }
    Ok(data)
}

pub fn parse_tensor(s: &str) -> Result<DenseTensor> {
    let mut lines = s.lines();
    match lines.next() {
        Some("tensor") => {}
        other => return Err(parse_err(format!("expected `tensor` header, got {:?}", other))),
    }
    let order: usize = lines
        .next()
        .ok_or_else(|| parse_err("missing order line"))?
        .trim()
        .parse()
        .map_err(|_| parse_err("bad order line"))?;
    let shape_line = lines.next().ok_or_else(|| parse_err("missing shape line"))?;
    let shape: Vec<usize> = shape_line
        .split_whitespace()
        .map(|tok| tok.parse().map_err(|_| parse_err("bad shape entry")))
        .collect::<Result<_>>()?;
    if shape.len() != order {
        return Err(parse_err(format!(
            "order {} but {} shape entries",
            order,
            shape.len()
        )));
    }
    let data = parse_values(lines, shape.iter().product())?;
    DenseTensor::from_data(&shape, data)
}

pub fn parse_matrix(s: &str) -> Result<Matrix> {
    let mut lines = s.lines();
    match lines.next() {
        Some("matrix") => {}
        other => return Err(parse_err(format!("expected `matrix` header, got {:?}", other))),
    }
    let dims_line = lines.next().ok_or_else(|| parse_err("missing dims line"))?;
    let dims: Vec<usize> = dims_line
        .split_whitespace()
        .map(|tok| tok.parse().map_err(|_| parse_err("bad dimension entry")))
        .collect::<Result<_>>()?;
    let [rows, cols] = dims[..] else {
        return Err(parse_err("dims line must be `rows cols`"));
    };
    let data = parse_values(lines, rows * cols)?;
    Matrix::from_data(rows, cols, data)
}

pub fn write_tensor(path: impl AsRef<Path>, t: &DenseTensor) -> Result<()> {
    std::fs::write(path, format_tensor(t))?;
    Ok(())
}

pub fn read_tensor(path: impl AsRef<Path>) -> Result<DenseTensor> {
    parse_tensor(&std::fs::read_to_string(path)?)
}

pub fn write_matrix(path: impl AsRef<Path>, m: &Matrix) -> Result<()> {
    std::fs::write(path, format_matrix(m))?;
    Ok(())
}

pub fn read_matrix(path: impl AsRef<Path>) -> Result<Matrix> {
    parse_matrix(&std::fs::read_to_string(path)?)
}

/// key=value manifest, one entry per line, order preserved.
pub fn format_manifest(entries: &[(String, String)]) -> String {
    let mut out = String::new();
    for (k, v) in entries {
        writeln!(out, "{}={}", k, v).unwrap();
    }
    out
}

pub fn parse_manifest(s: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for line in s.lines() {
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| parse_err(format!("manifest line {:?} lacks `=`", line)))?;
        out.push((k.to_string(), v.to_string()));
    }
    Ok(out)
}

pub fn write_manifest(path: impl AsRef<Path>, entries: &[(String, String)]) -> Result<()> {
    std::fs::write(path, format_manifest(entries))?;
    Ok(())
}

pub fn read_manifest(path: impl AsRef<Path>) -> Result<Vec<(String, String)>> {
    parse_manifest(&std::fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    #[test]
    fn tensor_round_trip_is_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let data: Vec<f64> = (0..24).map(|_| rng.sample(StandardNormal)).collect();
        let t = DenseTensor::from_data(&[2, 3, 4], data).unwrap();
        let back = parse_tensor(&format_tensor(&t)).unwrap();
        assert_eq!(back.shape(), t.shape());
        assert_eq!(back.data(), t.data()); // bit-exact at 17 digits
    }

    #[test]
    fn matrix_round_trip_is_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let m = Matrix::from_fn(3, 5, |_, _| rng.sample(StandardNormal));
        let back = parse_matrix(&format_matrix(&m)).unwrap();
        assert_eq!(back.rows(), 3);
        assert_eq!(back.cols(), 5);
        assert_eq!(back.data(), m.data());
    }

    #[test]
    fn header_layout() {
        let t = DenseTensor::from_data(&[2, 2], vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let text = format_tensor(&t);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "tensor");
        assert_eq!(lines[1], "2");
        assert_eq!(lines[2], "2 2");
        assert_eq!(lines.len(), 7);

        let m = Matrix::from_rows(&[vec![1.0, 3.0], vec![2.0, 4.0]]);
        let text = format_matrix(&m);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "matrix");
        assert_eq!(lines[1], "2 2");
        // column-major value order
        assert_eq!(lines[2].parse::<f64>().unwrap(), 1.0);
        assert_eq!(lines[3].parse::<f64>().unwrap(), 2.0);
        assert_eq!(lines[4].parse::<f64>().unwrap(), 3.0);
    }

    #[test]
    fn parse_rejects_malformed_input() {
        assert!(parse_tensor("matrix\n2\n2 2\n").is_err()); // wrong header
        assert!(parse_tensor("tensor\n2\n2 2 2\n").is_err()); // order/shape clash
        assert!(parse_tensor("tensor\n1\n2\n1.0\n").is_err()); // too few values
        assert!(parse_tensor("tensor\n1\n2\n1.0\n2.0\n3.0\n").is_err()); // too many
        assert!(parse_tensor("tensor\n1\n2\n1.0\nnope\n").is_err()); // bad value
        assert!(parse_matrix("matrix\n2\n1.0\n2.0\n").is_err()); // dims line short
        assert!(parse_matrix("tensor\n2 1\n1.0\n2.0\n").is_err()); // wrong header
    }

    #[test]
    fn manifest_round_trip() {
        let entries = vec![
            ("scenario".to_string(), "tensor-matrix".to_string()),
            ("seed".to_string(), "42".to_string()),
            ("eta".to_string(), "0.1".to_string()),
            ("weights".to_string(), "1 1 1".to_string()),
        ];
        let back = parse_manifest(&format_manifest(&entries)).unwrap();
        assert_eq!(back, entries);
        assert!(parse_manifest("no separator here\n").is_err());
    }

    #[test]
    fn file_round_trip() {
        let dir = std::env::temp_dir().join("cmtf-io-test");
        std::fs::create_dir_all(&dir).unwrap();
        let t = DenseTensor::from_data(&[2, 2], vec![1.0, -2.5, 3.25, 0.0]).unwrap();
        let path = dir.join("t.txt");
        write_tensor(&path, &t).unwrap();
        assert_eq!(read_tensor(&path).unwrap().data(), t.data());
        assert!(read_tensor(dir.join("missing.txt")).is_err());
    }
}
