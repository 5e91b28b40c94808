use super::boxes::widest_dim_masked;
use super::{IBox, Interval};

/// Hull of the evaluations over `segments` equal slabs of the widest
/// dimension, intersected with the evaluation over the whole box.
///
/// Consecutive slabs share their endpoints, so their union is exactly the
/// box whatever the rounding of the cut points. The final intersection keeps
/// the result inside the unrefined enclosure.
pub fn refined_eval<E, F>(f: F, dims: &[Interval], segments: usize) -> Result<Interval, E>
where
    F: Fn(&[Interval]) -> Result<Interval, E>,
{
    refined_eval_masked(f, dims, segments, None)
}

/// As [`refined_eval`], slicing the widest dimension among those with
/// `mask[i]` set. Slicing a dimension `f` ignores gains nothing.
pub fn refined_eval_masked<E, F>(f: F, dims: &[Interval], segments: usize, mask: Option<&[bool]>) -> Result<Interval, E>
where
    F: Fn(&[Interval]) -> Result<Interval, E>,
{
    let whole = f(dims)?;
    if segments <= 1 || dims.is_empty() || mask.is_some_and(|m| !m.contains(&true)) {
        return Ok(whole);
    }
    let k = widest_dim_masked(dims, mask);
    let d = dims[k];
    if d.lo() == d.hi() {
        return Ok(whole);
    }
    let (lo, hi) = (d.lo(), d.hi());
    let w = hi - lo;
    let mut slab = dims.to_vec();
    let mut acc: Option<Interval> = None;
    let mut left = lo;
    for s in 1..=segments {
        let right = if s == segments {
            hi
        } else {
            (lo + w * (s as f64) / (segments as f64)).clamp(left, hi)
        };
        slab[k] = Interval::raw(left, right);
        let v = f(&slab)?;
        acc = Some(match acc {
            None => v,
            Some(a) => a.hull(&v),
        });
        left = right;
    }
    let hull = acc.expect("at least one slab");
    Ok(hull.intersect(&whole).unwrap_or(whole))
}

pub fn refined_eval_box<E, F>(f: F, b: &IBox, segments: usize) -> Result<Interval, E>
where
    F: Fn(&[Interval]) -> Result<Interval, E>,
{
    refined_eval(f, b.dims(), segments)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::convert::Infallible;

    fn iv(lo: f64, hi: f64) -> Interval {
        Interval::new(lo, hi).unwrap()
    }

    fn logistic(d: &[Interval]) -> Result<Interval, Infallible> {
        Ok(d[0] * (Interval::ONE - d[0]))
    }

    #[test]
    fn single_segment_is_the_naive_product() {
        assert_eq!(refined_eval(logistic, &[iv(0.0, 1.0)], 1).unwrap(), iv(0.0, 1.0));
    }

    #[test]
    fn ten_segments_tighten_but_still_enclose() {
        let r = refined_eval(logistic, &[iv(0.0, 1.0)], 10).unwrap();
        assert!(r.is_subset(&iv(0.0, 1.0)));
        assert!(r.contains(0.25) && r.contains(0.0));
        // Slabs [0.4,0.5] and [0.5,0.6] each give [0.2,0.3].
        assert!(r.hi() <= 0.3 + 1e-15, "{r:?}");
        for i in 0..=1000 {
            let x = i as f64 / 1000.0;
            assert!(r.contains(x * (1.0 - x)));
        }
    }

    #[test]
    fn degenerate_box_stays_tight() {
        let f = |d: &[Interval]| -> Result<Interval, Infallible> { Ok(d[0].sin(4)) };
        for k in [1, 3, 10] {
            assert!(refined_eval(f, &[iv(0.0, 0.0)], k).unwrap().width() <= 1e-12);
        }
    }

    #[test]
    fn errors_propagate() {
        let f = |d: &[Interval]| d[0].sqrt();
        assert!(refined_eval(f, &[iv(-1.0, 1.0)], 4).is_err());
    }
}
