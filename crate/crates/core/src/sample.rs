use crate::{Error, Result};

/// An ordered collection of `n` points in `R^d`, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    dim: usize,
    coords: Vec<f64>,
}

impl Sample {
    /// Builds a sample from flat row-major coordinates.
    pub fn new(dim: usize, coords: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidArgument("point dimension must be at least 1".into()));
        }
        if coords.len() % dim != 0 {
            return Err(Error::InvalidArgument(format!(
                "{} coordinates do not split into points of dimension {dim}",
                coords.len()
            )));
        }
        if let Some(pos) = coords.iter().position(|c| !c.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "non-finite coordinate in point {}",
                pos / dim
            )));
        }
        Ok(Sample { dim, coords })
    }

    /// A sample of scalar observations (`d = 1`).
    pub fn scalar(values: Vec<f64>) -> Result<Self> {
        Self::new(1, values)
    }

    pub fn from_points(points: &[Vec<f64>]) -> Result<Self> {
        let dim = points.first().map_or(1, Vec::len);
        if let Some(i) = points.iter().position(|p| p.len() != dim) {
            return Err(Error::InvalidArgument(format!(
                "point {i} has dimension {} but point 0 has dimension {dim}",
                points[i].len()
            )));
        }
        Self::new(dim, points.concat())
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn points(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.coords.chunks_exact(self.dim)
    }

    /// Raw coordinates; for scalar samples this is the observation vector.
    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    /// Parses one point per line with comma-separated coordinates. A first
    /// line that is not entirely numeric is taken as a header. Blank lines
    /// are skipped.
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut dim = None;
        let mut coords = Vec::new();
        let mut first = true;
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            let parsed: std::result::Result<Vec<f64>, _> = fields.iter().map(|f| f.parse::<f64>()).collect();
            let row = match parsed {
                Ok(row) => row,
                Err(_) if first => {
                    first = false;
                    continue;
                }
                Err(_) => {
                    let bad = fields.iter().find(|f| f.parse::<f64>().is_err()).unwrap_or(&"");
                    return Err(Error::Parse {
                        line: i + 1,
                        message: format!("`{bad}` is not a number"),
                    });
                }
            };
            first = false;
            if let Some(c) = row.iter().find(|c| !c.is_finite()) {
                return Err(Error::Parse {
                    line: i + 1,
                    message: format!("non-finite value `{c}`"),
                });
            }
            match dim {
                None => dim = Some(row.len()),
                Some(d) if d != row.len() => {
                    return Err(Error::Parse {
                        line: i + 1,
                        message: format!("expected {d} columns, found {}", row.len()),
                    })
                }
                Some(_) => {}
            }
            coords.extend(row);
        }
        let dim = dim.ok_or(Error::Parse {
            line: text.lines().count().max(1),
            message: "no data rows".into(),
        })?;
        Self::new(dim, coords)
    }

    /// Applies `f` to every coordinate.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(self.dim, self.coords.iter().map(|&c| f(c)).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_plain_and_header() {
        let s = Sample::from_csv("1\n2\n3\n").unwrap();
        assert_eq!((s.len(), s.dim(), s.coords()), (3, 1, &[1.0, 2.0, 3.0][..]));
        let s = Sample::from_csv("x, y\n0,1\n\n2 , 3\n").unwrap();
        assert_eq!((s.len(), s.dim()), (2, 2));
        assert_eq!(s.point(1), &[2.0, 3.0]);
    }

    #[test]
    fn csv_diagnostics_carry_line_numbers() {
        assert_eq!(
            Sample::from_csv("1\nabc\n3").unwrap_err(),
            Error::Parse { line: 2, message: "`abc` is not a number".into() }
        );
        assert!(matches!(Sample::from_csv("1,2\n3\n"), Err(Error::Parse { line: 2, .. })));
        assert!(matches!(Sample::from_csv("1\nnan\n"), Err(Error::Parse { line: 2, .. })));
        assert!(matches!(Sample::from_csv("abc\n"), Err(Error::Parse { .. })));
        assert!(matches!(Sample::from_csv(""), Err(Error::Parse { .. })));
    }

    #[test]
    fn rejects_bad_shapes() {
        assert!(Sample::new(0, vec![]).is_err());
        assert!(Sample::new(2, vec![1.0, 2.0, 3.0]).is_err());
        assert!(Sample::scalar(vec![f64::INFINITY]).is_err());
        assert!(Sample::from_points(&[vec![1.0], vec![1.0, 2.0]]).is_err());
    }
}
