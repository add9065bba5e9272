use anyhow::{anyhow, bail, Context, Result};
use shapescale::Shape;
use std::io::Write;
use std::path::{Path, PathBuf};

/// Parses a positive number with optional scientific notation and a metric
/// suffix (K, M, G, T), e.g. "600e6", "40G", "9T".
pub fn parse_scaled(s: &str) -> Result<f64> {
    let s = s.trim();
    let (body, mult) = match s.chars().last() {
        Some('k') | Some('K') => (&s[..s.len() - 1], 1e3),
        Some('M') => (&s[..s.len() - 1], 1e6),
        Some('g') | Some('G') => (&s[..s.len() - 1], 1e9),
        Some('t') | Some('T') => (&s[..s.len() - 1], 1e12),
        _ => (s, 1.0),
    };
    let v: f64 = body
        .parse()
        .map_err(|_| anyhow!("cannot parse number {s:?}"))?;
    Ok(v * mult)
}

/// Like [`parse_scaled`] but for integer counts (example counts).
pub fn parse_count(s: &str) -> Result<u64> {
    let v = parse_scaled(s)?;
    if !(v >= 0.0 && v.is_finite() && v <= 2f64.powi(53)) {
        bail!("count {s:?} out of range");
    }
    if (v - v.round()).abs() > 1e-6 * v.max(1.0) {
        bail!("count {s:?} is not an integer");
    }
    Ok(v.round() as u64)
}

pub fn parse_shape(s: &str) -> Result<Shape> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 3 {
        bail!("expected width,depth,mlp_dim, got {s:?}");
    }
    let dims: Vec<u64> = parts
        .iter()
        .map(|p| parse_count(p))
        .collect::<Result<_>>()?;
    Ok(Shape::new(dims[0] as u32, dims[1] as u32, dims[2] as u32))
}

pub fn parse_weights(s: &str) -> Result<[f64; 3]> {
    let v: Vec<f64> = s.split(',').map(parse_scaled).collect::<Result<_>>()?;
    if v.len() != 3 {
        bail!("expected three comma-separated values");
    }
    Ok([v[0], v[1], v[2]])
}

/// Writes `content` to `out` (stdout when absent). Output files are created
/// fresh; inputs are never modified in place.
pub fn write_output(out: &Option<PathBuf>, content: &str) -> Result<()> {
    match out {
        Some(path) => {
            std::fs::write(path, content)
                .with_context(|| format!("writing {}", path.display()))?;
        }
        None => {
            std::io::stdout().write_all(content.as_bytes())?;
        }
    }
    Ok(())
}

pub fn read_to_string(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scaled_suffixes() {
        assert_eq!(parse_scaled("9T").unwrap(), 9e12);
        assert_eq!(parse_scaled("1e9").unwrap(), 1e9);
        assert_eq!(parse_scaled("600e6").unwrap(), 6e8);
        assert_eq!(parse_scaled("40G").unwrap(), 4e10);
        assert_eq!(parse_count("128M").unwrap(), 128_000_000);
        assert!(parse_scaled("wat").is_err());
        assert!(parse_count("1.5").is_err());
    }

    #[test]
    fn shape_triple() {
        assert_eq!(parse_shape("608,10,928").unwrap(), Shape::new(608, 10, 928));
        assert!(parse_shape("608,10").is_err());
    }
}
