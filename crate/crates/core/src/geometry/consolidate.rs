//! Merging fragmented collinear detections into continuous rules.
//!
//! Two segments are near when the axial gap between their extents is at most
//! `gap_tol` and their perpendicular offsets, evaluated at the middle of that
//! gap (or overlap), differ by at most `offset_tol`. Near segments are joined
//! transitively. A merged group spans the union of its members' axial extents;
//! its slope and offset are the extent-weighted means of the members'. Since a
//! merged rule can come within reach of another, merging repeats until no two
//! outputs are near, which also makes the operation idempotent.

use super::{LineSegment, Orientation};

#[derive(Debug, Clone, Copy)]
struct Run {
    lo: f64,
    hi: f64,
    /// Minor coordinate at major 0.
    intercept: f64,
    slope: f64,
    /// Source segment, kept for singletons so they pass through unchanged.
    source: LineSegment,
}

impl Run {
    fn from_segment(s: &LineSegment, orientation: Orientation) -> Run {
        let (m1, n1) = orientation.axes(s.p1);
        let (m2, n2) = orientation.axes(s.p2);
        let slope = if m1 != m2 { (n2 - n1) / (m2 - m1) } else { 0.0 };
        let (p1, p2, lo, hi) = if m1 <= m2 {
            (s.p1, s.p2, m1, m2)
        } else {
            (s.p2, s.p1, m2, m1)
        };
        Run {
            lo,
            hi,
            intercept: n1 - slope * m1,
            slope,
            source: LineSegment { p1, p2, orientation },
        }
    }

    fn minor_at(&self, major: f64) -> f64 {
        self.intercept + self.slope * major
    }

    fn weight(&self) -> f64 {
        self.hi - self.lo + 1.0
    }

    fn offset(&self) -> f64 {
        self.minor_at((self.lo + self.hi) / 2.0)
    }
}

fn near(a: &Run, b: &Run, gap_tol: f64, offset_tol: f64) -> bool {
    let start = a.lo.max(b.lo);
    let end = a.hi.min(b.hi);
    if start - end > gap_tol {
        return false;
    }
    let probe = (start + end) / 2.0;
    (a.minor_at(probe) - b.minor_at(probe)).abs() <= offset_tol
}

fn find(parent: &mut [usize], mut i: usize) -> usize {
    while parent[i] != i {
        parent[i] = parent[parent[i]];
        i = parent[i];
    }
    i
}

fn merge(group: &[Run], orientation: Orientation) -> Run {
    if let [only] = group {
        return *only;
    }
    let lo = group.iter().map(|r| r.lo).fold(f64::INFINITY, f64::min);
    let hi = group.iter().map(|r| r.hi).fold(f64::NEG_INFINITY, f64::max);
    let reference = (lo + hi) / 2.0;
    let total: f64 = group.iter().map(Run::weight).sum();
    let slope = group.iter().map(|r| r.weight() * r.slope).sum::<f64>() / total;
    let offset = group
        .iter()
        .map(|r| r.weight() * r.minor_at(reference))
        .sum::<f64>()
        / total;
    let intercept = offset - slope * reference;
    let p1 = orientation.point(lo, intercept + slope * lo);
    let p2 = orientation.point(hi, intercept + slope * hi);
    Run {
        lo,
        hi,
        intercept,
        slope,
        source: LineSegment { p1, p2, orientation },
    }
}

/// Merges near segments until none remain, returned sorted by offset.
///
/// Each output has `p1` at the smaller axial coordinate. `orientation` fixes
/// which axis is "along" the rule; `Free` is treated as horizontal.
pub fn consolidate(
    segments: &[LineSegment],
    orientation: Orientation,
    gap_tol: f64,
    offset_tol: f64,
) -> Vec<LineSegment> {
    let mut runs: Vec<Run> = segments
        .iter()
        .map(|s| Run::from_segment(s, orientation))
        .collect();
    loop {
        let n = runs.len();
        let mut parent: Vec<usize> = (0..n).collect();
        let mut merged_any = false;
        for i in 0..n {
            for j in i + 1..n {
                if near(&runs[i], &runs[j], gap_tol, offset_tol) {
                    let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                    if a != b {
                        parent[a.max(b)] = a.min(b);
                        merged_any = true;
                    }
                }
            }
        }
        if !merged_any {
            break;
        }
        let mut groups: Vec<Vec<Run>> = Vec::new();
        let mut slot = vec![usize::MAX; n];
        for i in 0..n {
            let root = find(&mut parent, i);
            if slot[root] == usize::MAX {
                slot[root] = groups.len();
                groups.push(Vec::new());
            }
            groups[slot[root]].push(runs[i]);
        }
        runs = groups.iter().map(|g| merge(g, orientation)).collect();
    }
    runs.sort_by(|a, b| {
        a.offset()
            .total_cmp(&b.offset())
            .then(a.lo.total_cmp(&b.lo))
            .then(a.hi.total_cmp(&b.hi))
    });
    runs.into_iter().map(|r| r.source).collect()
}
