use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};

const MAGIC: &str = "# wulff-field v1";

/// Cell-centred scalar field on a uniform grid. Cell `(i, j)` has centre
/// `(x0 + (i + 1/2)h, y0 + (j + 1/2)h)`; the outermost ring of cells carries
/// the Dirichlet trace.
#[derive(Clone, PartialEq)]
pub struct GridField {
    pub nx: usize,
    pub ny: usize,
    pub h: f64,
    pub x0: f64,
    pub y0: f64,
    pub values: Vec<f64>,
}

impl std::fmt::Debug for GridField {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "GridField {{ {}x{}, h: {}, origin: ({}, {}) }}",
            self.nx, self.ny, self.h, self.x0, self.y0
        )
    }
}

impl GridField {
    pub fn new(nx: usize, ny: usize, h: f64, x0: f64, y0: f64) -> Result<Self> {
        if nx < 3 || ny < 3 {
            return Err(Error::Domain(format!("grid {nx}x{ny} too small, need at least 3x3")));
        }
        if !(h > 0.0) || !h.is_finite() {
            return Err(Error::Domain(format!("invalid spacing {h}")));
        }
        Ok(GridField {
            nx,
            ny,
            h,
            x0,
            y0,
            values: vec![0.0; nx * ny],
        })
    }

    pub fn from_fn(nx: usize, ny: usize, h: f64, x0: f64, y0: f64, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        let mut g = Self::new(nx, ny, h, x0, y0)?;
        for j in 0..ny {
            for i in 0..nx {
                let (x, y) = g.center(i, j);
                g.values[j * nx + i] = f(x, y);
            }
        }
        Ok(g)
    }

    #[inline]
    pub fn idx(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[j * self.nx + i]
    }

    pub fn center(&self, i: usize, j: usize) -> (f64, f64) {
        (
            self.x0 + (i as f64 + 0.5) * self.h,
            self.y0 + (j as f64 + 0.5) * self.h,
        )
    }

    pub fn is_boundary(&self, i: usize, j: usize) -> bool {
        i == 0 || j == 0 || i + 1 == self.nx || j + 1 == self.ny
    }

    /// Domain extent `(xmin, xmax, ymin, ymax)`.
    pub fn extent(&self) -> (f64, f64, f64, f64) {
        (
            self.x0,
            self.x0 + self.nx as f64 * self.h,
            self.y0,
            self.y0 + self.ny as f64 * self.h,
        )
    }

    pub fn domain_center(&self) -> [f64; 2] {
        let (a, b, c, d) = self.extent();
        [0.5 * (a + b), 0.5 * (c + d)]
    }

    /// Forward-difference gradient of cell `(i, j)`, defined for
    /// `i ≤ nx-2`, `j ≤ ny-2`.
    #[inline]
    pub fn grad(&self, i: usize, j: usize) -> [f64; 2] {
        let u = self.at(i, j);
        [
            (self.at(i + 1, j) - u) / self.h,
            (self.at(i, j + 1) - u) / self.h,
        ]
    }

    /// All forward-difference gradients, indexed like the gradient cells
    /// (`(nx-1) x (ny-1)`, row-major).
    pub fn gradients(&self) -> Vec<[f64; 2]> {
        let mut out = Vec::with_capacity((self.nx - 1) * (self.ny - 1));
        for j in 0..self.ny - 1 {
            for i in 0..self.nx - 1 {
                out.push(self.grad(i, j));
            }
        }
        out
    }

    /// `u*` (supremum of the values).
    pub fn u_max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// `u_*` (infimum of the values).
    pub fn u_min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn oscillation(&self) -> f64 {
        self.u_max() - self.u_min()
    }

    /// Overwrites the boundary ring with `trace(x, y)`.
    pub fn impose_trace(&mut self, trace: impl Fn(f64, f64) -> f64) {
        for j in 0..self.ny {
            for i in 0..self.nx {
                if self.is_boundary(i, j) {
                    let (x, y) = self.center(i, j);
                    let k = self.idx(i, j);
                    self.values[k] = trace(x, y);
                }
            }
        }
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        writeln!(s, "{MAGIC}").unwrap();
        writeln!(s, "{} {} {:e} {:e} {:e}", self.nx, self.ny, self.h, self.x0, self.y0).unwrap();
        for j in 0..self.ny {
            let row: Vec<String> = (0..self.nx).map(|i| format!("{:e}", self.at(i, j))).collect();
            writeln!(s, "{}", row.join(" ")).unwrap();
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let bad = |m: String| Error::config("field", m);
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        if lines.next().map(str::trim) != Some(MAGIC) {
            return Err(bad(format!("missing `{MAGIC}` header")));
        }
        let head: Vec<&str> = lines
            .next()
            .ok_or_else(|| bad("missing size line".into()))?
            .split_whitespace()
            .collect();
        if head.len() != 5 {
            return Err(bad("size line needs `nx ny h x0 y0`".into()));
        }
        let parse_f = |s: &str| s.parse::<f64>().map_err(|e| bad(format!("`{s}`: {e}")));
        let parse_u = |s: &str| s.parse::<usize>().map_err(|e| bad(format!("`{s}`: {e}")));
        let mut g = GridField::new(
            parse_u(head[0])?,
            parse_u(head[1])?,
            parse_f(head[2])?,
            parse_f(head[3])?,
            parse_f(head[4])?,
        )?;
        let mut k = 0;
        for line in lines {
            for tok in line.split_whitespace() {
                if k >= g.values.len() {
                    return Err(bad("too many values".into()));
                }
                g.values[k] = parse_f(tok)?;
                k += 1;
            }
        }
        if k != g.values.len() {
            return Err(bad(format!("expected {} values, found {k}", g.values.len())));
        }
        Ok(g)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_text(&std::fs::read_to_string(path)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn text_round_trip_is_exact() {
        let g = GridField::from_fn(5, 4, 0.25, -1.0, -0.5, |x, y| (x * 3.1).sin() + y / 7.0).unwrap();
        let back = GridField::from_text(&g.to_text()).unwrap();
        assert_eq!(g, back);
    }

    #[test]
    fn rejects_malformed_text() {
        assert!(GridField::from_text("nope").is_err());
        assert!(GridField::from_text("# wulff-field v1\n3 3 0.1 0 0\n1 2 3").is_err());
    }

    #[test]
    fn forward_gradient_of_affine_field() {
        let g = GridField::from_fn(6, 6, 0.1, 0.0, 0.0, |x, y| 2.0 * x - y).unwrap();
        let d = g.grad(2, 3);
        assert!((d[0] - 2.0).abs() < 1e-12 && (d[1] + 1.0).abs() < 1e-12);
        assert_eq!(g.gradients().len(), 25);
    }
}
