//! Sweep grid specifications: `d=3,4,5;t=1:8;delta=1,2` where each key takes
//! a comma list of values and/or inclusive `a:b` ranges.

use anyhow::{bail, Result};

#[derive(Debug, Default, PartialEq, Eq)]
pub struct GridSpec {
    pub d: Vec<u32>,
    pub t: Vec<u32>,
    pub delta: Vec<u32>,
}

impl GridSpec {
    pub fn points(&self) -> Vec<(u32, u32, u32)> {
        let mut out = Vec::new();
        for &d in &self.d {
            for &t in &self.t {
                for &delta in &self.delta {
                    out.push((d, t, delta));
                }
            }
        }
        out
    }
}

fn parse_values(text: &str) -> Result<Vec<u32>> {
    let mut out = Vec::new();
    for item in text.split(',') {
        let item = item.trim();
        if item.is_empty() {
            bail!("empty value in grid spec");
        }
        if let Some((lo, hi)) = item.split_once(':') {
            let lo: u32 = lo.trim().parse()?;
            let hi: u32 = hi.trim().parse()?;
            if lo > hi {
                bail!("descending range {item} in grid spec");
            }
            out.extend(lo..=hi);
        } else {
            out.push(item.parse()?);
        }
    }
    Ok(out)
}

pub fn parse_grid(spec: &str) -> Result<GridSpec> {
    let mut grid = GridSpec::default();
    for part in spec.split(';') {
        let part = part.trim();
        if part.is_empty() {
            continue;
        }
        let Some((key, value)) = part.split_once('=') else {
            bail!("grid spec part {part:?} is not key=value");
        };
        let values = parse_values(value)?;
        match key.trim() {
            "d" => grid.d = values,
            "t" => grid.t = values,
            "delta" => grid.delta = values,
            other => bail!("unknown grid key {other:?} (expected d, t, delta)"),
        }
    }
    Ok(grid)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_lists_and_ranges() {
        let grid = parse_grid("d=3,4,5;t=1:3;delta=1,2").unwrap();
        assert_eq!(grid.d, vec![3, 4, 5]);
        assert_eq!(grid.t, vec![1, 2, 3]);
        assert_eq!(grid.delta, vec![1, 2]);
        assert_eq!(grid.points().len(), 18);
    }

    #[test]
    fn missing_key_means_no_points() {
        let grid = parse_grid("d=3;t=1:2").unwrap();
        assert!(grid.points().is_empty());
    }

    #[test]
    fn rejects_malformed_specs() {
        assert!(parse_grid("d=3;bogus=1").is_err());
        assert!(parse_grid("d=5:3").is_err());
        assert!(parse_grid("d").is_err());
        assert!(parse_grid("d=,").is_err());
    }
}
