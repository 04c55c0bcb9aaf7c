//! Table structure from ruling lines: the snapped intersection grid, cells
//! found by point spreading, row/column indices and the page band split.

use serde::{Deserialize, Serialize};

use crate::geometry::{intersect, LineSegment, Point};
use crate::imaging::Rect;

pub const DEFAULT_SNAP_TOL: f64 = 4.0;

/// Intersection points after snapping, sorted by `(y, x)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridPoints {
    pub points: Vec<Point>,
    pub snap_tol: f64,
}

impl GridPoints {
    /// Snaps arbitrary points: any two within `snap_tol` on both axes are
    /// merged into their centroid, repeatedly, until none remain.
    pub fn snapped(points: impl IntoIterator<Item = Point>, snap_tol: f64) -> GridPoints {
        let mut current: Vec<(Point, usize)> = points.into_iter().map(|p| (p, 1)).collect();
        loop {
            sort_points(&mut current);
            let mut clusters: Vec<(f64, f64, usize)> = Vec::new();
            for &(p, w) in &current {
                let hit = clusters.iter_mut().find(|c| {
                    let n = c.2 as f64;
                    (c.0 / n - p.x).abs() <= snap_tol && (c.1 / n - p.y).abs() <= snap_tol
                });
                match hit {
                    Some(c) => {
                        c.0 += p.x * w as f64;
                        c.1 += p.y * w as f64;
                        c.2 += w;
                    }
                    None => clusters.push((p.x * w as f64, p.y * w as f64, w)),
                }
            }
            let changed = clusters.len() != current.len();
            current = clusters
                .into_iter()
                .map(|(sx, sy, n)| (Point::new(sx / n as f64, sy / n as f64), n))
                .collect();
            if !changed {
                break;
            }
        }
        sort_points(&mut current);
        GridPoints {
            points: current.into_iter().map(|(p, _)| p).collect(),
            snap_tol,
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Closest point within `snap_tol` of `target` on both axes.
    pub fn find_near(&self, target: Point) -> Option<Point> {
        self.points
            .iter()
            .filter(|q| {
                (q.x - target.x).abs() <= self.snap_tol && (q.y - target.y).abs() <= self.snap_tol
            })
            .min_by(|a, b| {
                let da = (a.x - target.x).abs().max((a.y - target.y).abs());
                let db = (b.x - target.x).abs().max((b.y - target.y).abs());
                da.total_cmp(&db).then(point_order(a, b))
            })
            .copied()
    }
}

fn point_order(a: &Point, b: &Point) -> std::cmp::Ordering {
    a.y.total_cmp(&b.y).then(a.x.total_cmp(&b.x))
}

fn sort_points(v: &mut [(Point, usize)]) {
    v.sort_by(|a, b| point_order(&a.0, &b.0).then(a.1.cmp(&b.1)));
}

/// Intersects every horizontal rule with every vertical one (as infinite
/// lines), drops points more than `snap_tol` outside `page`, and snaps.
pub fn build_grid(
    h_edges: &[LineSegment],
    v_edges: &[LineSegment],
    snap_tol: f64,
    page: Rect,
) -> GridPoints {
    let (x0, y0) = (page.x as f64 - snap_tol, page.y as f64 - snap_tol);
    let (x1, y1) = (page.right() as f64 + snap_tol, page.bottom() as f64 + snap_tol);
    let points = h_edges
        .iter()
        .flat_map(|h| v_edges.iter().filter_map(move |v| intersect(h, v).ok()))
        .filter(|p| p.x >= x0 && p.x <= x1 && p.y >= y0 && p.y <= y1);
    GridPoints::snapped(points, snap_tol)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub top_left: Point,
    pub bottom_right: Point,
    pub row_index: usize,
    pub col_index: usize,
}

impl Cell {
    /// Pixel rectangle with rounded corners, clamped to `page`.
    pub fn bbox(&self, page: Rect) -> Option<Rect> {
        let clamp = |v: f64, lo: usize, hi: usize| (v.round().max(lo as f64) as usize).min(hi);
        let x0 = clamp(self.top_left.x, page.x, page.right());
        let y0 = clamp(self.top_left.y, page.y, page.bottom());
        let x1 = clamp(self.bottom_right.x, page.x, page.right());
        let y1 = clamp(self.bottom_right.y, page.y, page.bottom());
        let r = Rect::new(x0, y0, x1.saturating_sub(x0), y1.saturating_sub(y0));
        (!r.is_empty()).then_some(r)
    }
}

/// Point spreading: from each grid point take the nearest point to the right
/// on its row and the nearest point below on its column; when the diagonal
/// corner exists too, those four points bound a cell.
///
/// Cells come out ordered by `(y0, x0)`; indices are left at 0 (see
/// [`assign_row_col`]).
pub fn detect_cells(grid: &GridPoints) -> Vec<Cell> {
    let tol = grid.snap_tol;
    let mut cells = Vec::new();
    for p in &grid.points {
        let nearest = |along_x: bool| {
            grid.points
                .iter()
                .filter(|q| {
                    if along_x {
                        (q.y - p.y).abs() <= tol && q.x > p.x + tol
                    } else {
                        (q.x - p.x).abs() <= tol && q.y > p.y + tol
                    }
                })
                .min_by(|a, b| {
                    let key = |q: &Point| {
                        if along_x {
                            (q.x - p.x, (q.y - p.y).abs())
                        } else {
                            (q.y - p.y, (q.x - p.x).abs())
                        }
                    };
                    let (ka, kb) = (key(a), key(b));
                    ka.0.total_cmp(&kb.0)
                        .then(ka.1.total_cmp(&kb.1))
                        .then(point_order(a, b))
                })
        };
        let (Some(right), Some(below)) = (nearest(true), nearest(false)) else {
            continue;
        };
        if let Some(corner) = grid.find_near(Point::new(right.x, below.y)) {
            if corner.x > p.x && corner.y > p.y {
                cells.push(Cell {
                    top_left: *p,
                    bottom_right: corner,
                    row_index: 0,
                    col_index: 0,
                });
            }
        }
    }
    cells.sort_by(|a, b| {
        point_order(&a.top_left, &b.top_left).then(point_order(&a.bottom_right, &b.bottom_right))
    });
    cells.dedup_by(|a, b| a.top_left == b.top_left && a.bottom_right == b.bottom_right);
    cells
}

/// Rows group cells whose top edges agree within `tol`; columns follow `x0`
/// inside a row. Output is ordered by `(row_index, col_index)`.
pub fn assign_row_col(cells: &[Cell], tol: f64) -> Vec<Cell> {
    let mut sorted = cells.to_vec();
    sorted.sort_by(|a, b| a.top_left.y.total_cmp(&b.top_left.y));
    let mut rows: Vec<Vec<Cell>> = Vec::new();
    let mut last_y = f64::NEG_INFINITY;
    for c in sorted {
        if rows.is_empty() || c.top_left.y - last_y > tol {
            rows.push(Vec::new());
        }
        last_y = c.top_left.y;
        rows.last_mut().unwrap().push(c);
    }
    let mut out = Vec::with_capacity(cells.len());
    for (r, mut row) in rows.into_iter().enumerate() {
        row.sort_by(|a, b| {
            a.top_left
                .x
                .total_cmp(&b.top_left.x)
                .then(a.top_left.y.total_cmp(&b.top_left.y))
        });
        for (c, mut cell) in row.into_iter().enumerate() {
            cell.row_index = r;
            cell.col_index = c;
            out.push(cell);
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableRegion {
    pub band: Rect,
    pub cells: Vec<Cell>,
}

/// Horizontal bands of the page: text above the table, the table, text below.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PageRegions {
    pub above: Option<Rect>,
    pub table: Option<TableRegion>,
    pub below: Option<Rect>,
}

impl PageRegions {
    pub fn heights(&self) -> (usize, usize, usize) {
        (
            self.above.map_or(0, |r| r.height),
            self.table.as_ref().map_or(0, |t| t.band.height),
            self.below.map_or(0, |r| r.height),
        )
    }
}

/// Splits `width x height` at the table band `[min y0, max y1]`. Without
/// cells the whole page is one non-table region, reported as `above`.
pub fn split_regions(width: usize, height: usize, cells: &[Cell]) -> PageRegions {
    let full = |y0: usize, y1: usize| (y1 > y0).then(|| Rect::new(0, y0, width, y1 - y0));
    if cells.is_empty() || height == 0 {
        return PageRegions {
            above: full(0, height),
            table: None,
            below: None,
        };
    }
    let top = cells.iter().map(|c| c.top_left.y).fold(f64::INFINITY, f64::min);
    let bottom = cells
        .iter()
        .map(|c| c.bottom_right.y)
        .fold(f64::NEG_INFINITY, f64::max);
    let top = (top.round().max(0.0) as usize).min(height - 1);
    let bottom = (bottom.round().max(0.0) as usize).clamp(top, height - 1);
    PageRegions {
        above: full(0, top),
        table: Some(TableRegion {
            band: Rect::new(0, top, width, bottom + 1 - top),
            cells: cells.to_vec(),
        }),
        below: full(bottom + 1, height),
    }
}
