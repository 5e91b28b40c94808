//! The work set of the maximizer and the single split-and-prune step.
//!
//! Nodes live in a slab; three lazy heaps (max upper bound, max lower bound,
//! min upper bound) give the two selections and pruning in logarithmic time.
//! A heap entry is stale once its node is gone and is skipped on pop.

use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;

use super::{BnBError, Objective};
use crate::interval::{IBox, Interval};

/// A box of the cover with its cached enclosure of the objective.
#[derive(Debug, Clone, PartialEq)]
pub struct Subproblem {
    pub region: IBox,
    pub bounds: Interval,
}

impl Subproblem {
    pub fn hi_bound(&self) -> f64 {
        self.bounds.hi()
    }

    pub fn lo_bound(&self) -> f64 {
        self.bounds.lo()
    }
}

/// Handle of a live subproblem.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SubId(usize);

#[derive(Debug, Clone)]
struct Node {
    dims: Vec<Interval>,
    bounds: Interval,
    width: f64,
    seq: u64,
    /// A representable midpoint strictly inside the widest dimension exists.
    bisectable: bool,
    mid_lower: Option<f64>,
}

/// Heap key: value, then larger width, then earlier insertion.
#[derive(Debug, Clone, Copy)]
struct Key {
    v: f64,
    w: f64,
    seq: u64,
    idx: usize,
}

impl PartialEq for Key {
    fn eq(&self, o: &Self) -> bool {
        self.cmp(o) == Ordering::Equal
    }
}
impl Eq for Key {}
impl PartialOrd for Key {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Key {
    fn cmp(&self, o: &Self) -> Ordering {
        self.v
            .total_cmp(&o.v)
            .then(self.w.total_cmp(&o.w))
            .then(o.seq.cmp(&self.seq))
    }
}

/// Outcome of one split-and-prune step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepOutcome {
    pub top: SubId,
    pub lower: f64,
    pub upper: f64,
    pub pruned: usize,
}

#[derive(Debug, Clone)]
pub struct Cover {
    labels: IBox,
    /// Dimensions the objective depends on; only these are measured and split.
    active: Option<Vec<bool>>,
    slots: Vec<Option<Node>>,
    live: usize,
    next_seq: u64,
    by_hi: BinaryHeap<Key>,
    by_lo: BinaryHeap<Key>,
    by_hi_min: BinaryHeap<Reverse<Key>>,
    pub(crate) interval_evals: u64,
    pub(crate) point_evals: u64,
    pub(crate) best_point: Option<Vec<f64>>,
}

impl Cover {
    /// The cover `{domain}` with its enclosure evaluated once.
    pub fn new<O: Objective + ?Sized>(obj: &O, domain: &IBox) -> Result<Cover, BnBError> {
        if obj.dim() != domain.len() {
            return Err(BnBError::DimensionMismatch { objective: obj.dim(), domain: domain.len() });
        }
        let bounds = obj.enclose(domain.dims()).map_err(BnBError::eval)?;
        let mut c = Cover {
            labels: domain.clone(),
            active: obj.active_dims().filter(|m| m.len() == domain.len()),
            slots: Vec::new(),
            live: 0,
            next_seq: 0,
            by_hi: BinaryHeap::new(),
            by_lo: BinaryHeap::new(),
            by_hi_min: BinaryHeap::new(),
            interval_evals: 1,
            point_evals: 0,
            best_point: None,
        };
        c.insert(domain.dims().to_vec(), bounds);
        Ok(c)
    }

    pub fn len(&self) -> usize {
        self.live
    }

    /// Widest active dimension, `None` when no dimension is active.
    fn split_dim(&self, dims: &[Interval]) -> Option<usize> {
        let mask = self.active.as_deref();
        if dims.is_empty() || mask.is_some_and(|m| !m.contains(&true)) {
            return None;
        }
        Some(crate::interval::widest_dim_masked(dims, mask))
    }

    pub fn is_empty(&self) -> bool {
        self.live == 0
    }

    fn insert(&mut self, dims: Vec<Interval>, bounds: Interval) -> SubId {
        let (width, bisectable) = match self.split_dim(&dims) {
            Some(k) => (dims[k].width(), dims[k].lo().next_up() < dims[k].hi()),
            None => (0.0, false),
        };
        let seq = self.next_seq;
        self.next_seq += 1;
        let idx = self.slots.len();
        self.slots.push(Some(Node { dims, bounds, width, seq, bisectable, mid_lower: None }));
        self.live += 1;
        self.by_hi.push(Key { v: bounds.hi(), w: width, seq, idx });
        self.by_lo.push(Key { v: bounds.lo(), w: width, seq, idx });
        self.by_hi_min.push(Reverse(Key { v: bounds.hi(), w: width, seq, idx }));
        SubId(idx)
    }

    fn node(&self, id: SubId) -> Option<&Node> {
        self.slots.get(id.0).and_then(Option::as_ref)
    }

    fn remove(&mut self, id: SubId) -> Option<Node> {
        let n = self.slots.get_mut(id.0)?.take();
        if n.is_some() {
            self.live -= 1;
        }
        n
    }

    pub fn get(&self, id: SubId) -> Option<Subproblem> {
        self.node(id).map(|n| self.subproblem(n))
    }

    fn subproblem(&self, n: &Node) -> Subproblem {
        Subproblem { region: self.labels.with_dims(n.dims.clone()), bounds: n.bounds }
    }

    /// Live subproblems in insertion order.
    pub fn subproblems(&self) -> Vec<Subproblem> {
        self.slots.iter().flatten().map(|n| self.subproblem(n)).collect()
    }

    pub fn ids(&self) -> Vec<SubId> {
        (0..self.slots.len()).filter(|&i| self.slots[i].is_some()).map(SubId).collect()
    }

    pub fn width(&self, id: SubId) -> f64 {
        self.node(id).map_or(0.0, |n| n.width)
    }

    /// Can be bisected and is wider than `eps_om`.
    pub fn splittable(&self, id: SubId, eps_om: f64) -> bool {
        self.node(id).is_some_and(|n| n.bisectable && n.width > eps_om)
    }

    fn top_of(heap: &mut BinaryHeap<Key>, slots: &[Option<Node>]) -> Option<SubId> {
        while let Some(k) = heap.peek() {
            match &slots[k.idx] {
                Some(n) if n.seq == k.seq => return Some(SubId(k.idx)),
                _ => {
                    heap.pop();
                }
            }
        }
        None
    }

    /// Subproblem of maximal upper bound.
    pub fn argmax_hi(&mut self) -> Option<SubId> {
        Self::top_of(&mut self.by_hi, &self.slots)
    }

    /// Subproblem of maximal lower bound.
    pub fn argmax_lo(&mut self) -> Option<SubId> {
        Self::top_of(&mut self.by_lo, &self.slots)
    }

    /// Subproblem of maximal lower bound among the splittable ones. Scans, since
    /// the splittable set changes with `eps_om`.
    pub fn argmax_lo_splittable(&self, eps_om: f64) -> Option<SubId> {
        let mut best: Option<Key> = None;
        for (idx, n) in self.slots.iter().enumerate() {
            let Some(n) = n else { continue };
            if !(n.bisectable && n.width > eps_om) {
                continue;
            }
            let k = Key { v: n.bounds.lo(), w: n.width, seq: n.seq, idx };
            if best.is_none_or(|b| k > b) {
                best = Some(k);
            }
        }
        best.map(|k| SubId(k.idx))
    }

    /// Remove every subproblem whose upper bound is below `l`.
    pub fn prune(&mut self, l: f64) -> usize {
        let mut count = 0;
        while let Some(Reverse(k)) = self.by_hi_min.peek().copied() {
            let live = matches!(&self.slots[k.idx], Some(n) if n.seq == k.seq);
            if !live {
                self.by_hi_min.pop();
                continue;
            }
            if k.v >= l {
                break;
            }
            self.by_hi_min.pop();
            self.remove(SubId(k.idx));
            count += 1;
        }
        count
    }

    /// Certified lower bound at `x`; raises `l` and remembers the best point.
    pub(crate) fn probe<O: Objective + ?Sized>(&mut self, obj: &O, x: Vec<f64>, l: &mut f64) -> Result<f64, BnBError> {
        self.point_evals += 1;
        let v = obj.point_lower(&x).map_err(BnBError::eval)?;
        if v > *l || self.best_point.is_none() {
            self.best_point = Some(x);
            *l = l.max(v);
        }
        Ok(v)
    }

    /// Raise `l` with the midpoint of the subproblem of maximal lower bound.
    /// Each node's midpoint is evaluated at most once.
    fn probe_best_mid<O: Objective + ?Sized>(&mut self, obj: &O, l: &mut f64) -> Result<(), BnBError> {
        let Some(m) = self.argmax_lo() else { return Ok(()) };
        let node = self.slots[m.0].as_ref().expect("live");
        if let Some(v) = node.mid_lower {
            *l = l.max(v);
            return Ok(());
        }
        let mid: Vec<f64> = node.dims.iter().map(Interval::mid).collect();
        let v = self.probe(obj, mid, l)?;
        self.slots[m.0].as_mut().expect("live").mid_lower = Some(v);
        Ok(())
    }

    /// Split `chosen` at the midpoint of its widest dimension, raise `l` at
    /// the midpoint of the best-lower-bound subproblem, prune, and report the
    /// new incumbent. Child enclosures are intersected with the parent's, so
    /// the upper bound of the cover never increases.
    pub fn step<O: Objective + ?Sized>(&mut self, obj: &O, chosen: SubId, l: f64) -> Result<StepOutcome, BnBError> {
        let node = self.node(chosen).ok_or(BnBError::UnknownSubproblem)?;
        let dim = self.split_dim(&node.dims).unwrap_or(0);
        if !node.bisectable {
            return Err(BnBError::DegenerateSplit { dim });
        }
        let (ld, rd) = crate::interval::bisect_dim(&node.dims, dim).map_err(|_| BnBError::DegenerateSplit { dim })?;
        let parent = node.bounds;
        let lb = obj.enclose(&ld).map_err(BnBError::eval)?;
        let rb = obj.enclose(&rd).map_err(BnBError::eval)?;
        self.interval_evals += 2;
        self.remove(chosen);
        // An enclosure disjoint from the parent's cannot happen for a sound
        // extension; fall back to the parent's bounds rather than fail.
        self.insert(ld, lb.intersect(&parent).unwrap_or(parent));
        self.insert(rd, rb.intersect(&parent).unwrap_or(parent));

        let mut l = l;
        self.probe_best_mid(obj, &mut l)?;
        let pruned = self.prune(l);
        let top = self.argmax_hi().ok_or(BnBError::EmptyCover)?;
        let upper = self.node(top).expect("live").bounds.hi();
        Ok(StepOutcome { top, lower: l, upper, pruned })
    }

    pub(crate) fn node_dims(&self, id: SubId) -> Option<&[Interval]> {
        self.node(id).map(|n| n.dims.as_slice())
    }

    /// Live ids by descending upper bound (ties as in the incumbent choice).
    pub fn ids_by_hi_desc(&self) -> Vec<SubId> {
        let mut keys: Vec<Key> = self
            .slots
            .iter()
            .enumerate()
            .filter_map(|(idx, n)| n.as_ref().map(|n| Key { v: n.bounds.hi(), w: n.width, seq: n.seq, idx }))
            .collect();
        keys.sort_by(|a, b| b.cmp(a));
        keys.into_iter().map(|k| SubId(k.idx)).collect()
    }
}

/// One step of the maximizer on `chosen`: see [`Cover::step`].
pub fn opt_bnb_step<O: Objective + ?Sized>(
    obj: &O,
    cover: &mut Cover,
    chosen: SubId,
    l: f64,
) -> Result<StepOutcome, BnBError> {
    cover.step(obj, chosen, l)
}
