use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use super::Interval;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SplitError {
    #[error("dimension {dim} has zero width and cannot be split")]
    DegenerateSplit { dim: usize },
    #[error("split point {point} is not strictly inside dimension {dim}")]
    PointOutside { dim: usize, point: f64 },
    #[error("dimension {dim} out of range for a {len}-dimensional box")]
    DimOutOfRange { dim: usize, len: usize },
    #[error("box needs at least one dimension and one label per dimension")]
    Malformed,
}

/// Labelled axis-aligned box. Labels are shared between a box and the boxes
/// split from it.
#[derive(Clone, PartialEq)]
pub struct IBox {
    labels: Arc<[String]>,
    dims: Vec<Interval>,
}

impl fmt::Debug for IBox {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut m = f.debug_map();
        for (l, d) in self.labels.iter().zip(&self.dims) {
            m.entry(l, d);
        }
        m.finish()
    }
}

impl IBox {
    pub fn new(labels: Vec<String>, dims: Vec<Interval>) -> Result<Self, SplitError> {
        if dims.is_empty() || labels.len() != dims.len() {
            return Err(SplitError::Malformed);
        }
        Ok(IBox { labels: labels.into(), dims })
    }

    /// Box with labels `x0, x1, ...`.
    pub fn unlabelled(dims: Vec<Interval>) -> Result<Self, SplitError> {
        let labels = (0..dims.len()).map(|i| format!("x{i}")).collect();
        IBox::new(labels, dims)
    }

    /// Box over the same labels with new bounds; `dims` must have the same length.
    pub fn with_dims(&self, dims: Vec<Interval>) -> IBox {
        assert_eq!(dims.len(), self.dims.len(), "dimension mismatch");
        IBox { labels: self.labels.clone(), dims }
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn dims(&self) -> &[Interval] {
        &self.dims
    }

    pub fn len(&self) -> usize {
        self.dims.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn width(&self) -> f64 {
        self.dims.iter().map(Interval::width).fold(0.0, f64::max)
    }

    /// First dimension of maximal width.
    pub fn widest_dim(&self) -> usize {
        widest_dim(&self.dims)
    }

    pub fn midpoint(&self) -> Vec<f64> {
        self.dims.iter().map(Interval::mid).collect()
    }

    pub fn split(&self, dim: usize, point: f64) -> Result<(IBox, IBox), SplitError> {
        let (l, r) = split_dims(&self.dims, dim, point)?;
        Ok((
            IBox { labels: self.labels.clone(), dims: l },
            IBox { labels: self.labels.clone(), dims: r },
        ))
    }

    /// Lower corner (`upper = false`) or upper corner.
    pub fn corner(&self, upper: bool) -> Vec<f64> {
        self.dims.iter().map(|d| if upper { d.hi() } else { d.lo() }).collect()
    }

    /// Corner selected by the bits of `mask` (bit i set: upper end of dim i).
    pub fn corner_by_mask(&self, mask: u64) -> Vec<f64> {
        self.dims
            .iter()
            .enumerate()
            .map(|(i, d)| if i < 64 && mask >> i & 1 == 1 { d.hi() } else { d.lo() })
            .collect()
    }

    pub fn contains_point(&self, x: &[f64]) -> bool {
        x.len() == self.dims.len() && self.dims.iter().zip(x).all(|(d, &v)| d.contains(v))
    }

    pub fn is_subset(&self, other: &IBox) -> bool {
        self.dims.len() == other.dims.len()
            && self.dims.iter().zip(&other.dims).all(|(a, b)| a.is_subset(b))
    }

    /// Affine image of a point of the unit cube.
    pub fn map_unit(&self, u: &[f64]) -> Vec<f64> {
        self.dims
            .iter()
            .zip(u)
            .map(|(d, &t)| (d.lo() + t * (d.hi() - d.lo())).clamp(d.lo(), d.hi()))
            .collect()
    }

    /// Sub-box over the named labels, in the given order.
    pub fn select(&self, names: &[&str]) -> Option<IBox> {
        let mut dims = Vec::with_capacity(names.len());
        for n in names {
            let i = self.labels.iter().position(|l| l == n)?;
            dims.push(self.dims[i]);
        }
        IBox::new(names.iter().map(|s| s.to_string()).collect(), dims).ok()
    }
}

pub(crate) fn widest_dim(dims: &[Interval]) -> usize {
    widest_dim_masked(dims, None)
}

/// Widest dimension among those with `mask[i]` set (all when `None`). Falls
/// back to 0 when the mask selects nothing.
pub(crate) fn widest_dim_masked(dims: &[Interval], mask: Option<&[bool]>) -> usize {
    let mut best = 0;
    let mut w = f64::NEG_INFINITY;
    for (i, d) in dims.iter().enumerate() {
        if mask.is_some_and(|m| !m[i]) {
            continue;
        }
        let wi = d.width();
        if wi > w {
            w = wi;
            best = i;
        }
    }
    best
}

pub(crate) fn split_dims(
    dims: &[Interval],
    dim: usize,
    point: f64,
) -> Result<(Vec<Interval>, Vec<Interval>), SplitError> {
    let d = *dims.get(dim).ok_or(SplitError::DimOutOfRange { dim, len: dims.len() })?;
    if d.lo() == d.hi() {
        return Err(SplitError::DegenerateSplit { dim });
    }
    if !(d.lo() < point && point < d.hi()) {
        return Err(SplitError::PointOutside { dim, point });
    }
    let mut l = dims.to_vec();
    let mut r = dims.to_vec();
    l[dim] = Interval::raw(d.lo(), point);
    r[dim] = Interval::raw(point, d.hi());
    Ok((l, r))
}

/// Bisect dimension `dim` at its midpoint.
pub(crate) fn bisect_dim(dims: &[Interval], dim: usize) -> Result<(Vec<Interval>, Vec<Interval>), SplitError> {
    let d = dims[dim];
    if d.lo() == d.hi() {
        return Err(SplitError::DegenerateSplit { dim });
    }
    let mut m = d.mid();
    // Adjacent doubles: no representable point strictly between them.
    if m <= d.lo() || m >= d.hi() {
        m = if d.lo().next_up() < d.hi() { d.lo().next_up() } else { d.hi() };
        if m >= d.hi() {
            return Err(SplitError::DegenerateSplit { dim });
        }
    }
    split_dims(dims, dim, m)
}
