use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

/// The three shape dimensions of a transformer encoder, in scaling order:
/// width (internal representation size), depth (encoder blocks), MLP hidden
/// dimension.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize,
)]
pub struct Shape {
    pub width: u32,
    pub depth: u32,
    pub mlp_dim: u32,
}

impl Shape {
    pub fn new(width: u32, depth: u32, mlp_dim: u32) -> Self {
        Self {
            width,
            depth,
            mlp_dim,
        }
    }

    pub fn dim(&self, dim: ShapeDim) -> u32 {
        match dim {
            ShapeDim::Width => self.width,
            ShapeDim::Depth => self.depth,
            ShapeDim::Mlp => self.mlp_dim,
        }
    }

    pub fn with_dim(mut self, dim: ShapeDim, value: u32) -> Self {
        match dim {
            ShapeDim::Width => self.width = value,
            ShapeDim::Depth => self.depth = value,
            ShapeDim::Mlp => self.mlp_dim = value,
        }
        self
    }

    pub fn as_array(&self) -> [u32; 3] {
        [self.width, self.depth, self.mlp_dim]
    }

    pub fn as_f64_array(&self) -> [f64; 3] {
        [self.width as f64, self.depth as f64, self.mlp_dim as f64]
    }
}

impl fmt::Display for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.width, self.depth, self.mlp_dim)
    }
}

/// Identifies one shape dimension. Ordering matches `Shape::as_array`.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize,
)]
#[serde(rename_all = "snake_case")]
pub enum ShapeDim {
    Width,
    Depth,
    Mlp,
}

impl ShapeDim {
    pub const ALL: [ShapeDim; 3] = [ShapeDim::Width, ShapeDim::Depth, ShapeDim::Mlp];

    pub fn index(&self) -> usize {
        match self {
            ShapeDim::Width => 0,
            ShapeDim::Depth => 1,
            ShapeDim::Mlp => 2,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            ShapeDim::Width => "width",
            ShapeDim::Depth => "depth",
            ShapeDim::Mlp => "mlp_dim",
        }
    }
}

impl fmt::Display for ShapeDim {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ShapeDim {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "width" => Ok(ShapeDim::Width),
            "depth" => Ok(ShapeDim::Depth),
            "mlp_dim" | "mlp" => Ok(ShapeDim::Mlp),
            other => Err(format!(
                "unknown shape dimension {other:?} (expected width, depth, or mlp_dim)"
            )),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dim_accessors_roundtrip() {
        let s = Shape::new(608, 10, 928);
        for d in ShapeDim::ALL {
            assert_eq!(s.dim(d), s.as_array()[d.index()]);
        }
        assert_eq!(s.with_dim(ShapeDim::Depth, 12).depth, 12);
    }

    #[test]
    fn lexicographic_order_is_width_depth_mlp() {
        let a = Shape::new(608, 10, 928);
        let b = Shape::new(608, 10, 929);
        let c = Shape::new(609, 1, 1);
        assert!(a < b);
        assert!(b < c);
    }

    #[test]
    fn dim_parses_both_spellings() {
        assert_eq!("mlp_dim".parse::<ShapeDim>().unwrap(), ShapeDim::Mlp);
        assert_eq!("mlp".parse::<ShapeDim>().unwrap(), ShapeDim::Mlp);
        assert!("head".parse::<ShapeDim>().is_err());
    }
}
