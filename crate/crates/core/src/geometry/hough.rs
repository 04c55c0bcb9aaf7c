//! Progressive probabilistic Hough transform restricted to near-axis lines.
//!
//! Foreground pixels are visited in a seeded random order. Each casts votes in
//! a (theta, rho) accumulator covering only the angles within the tolerance of
//! the target axis. When a bin reaches the vote threshold the line is walked
//! from the current pixel in both directions inside a narrow corridor,
//! tolerating up to `max_gap` empty steps. The pixels collected by the walk are
//! removed from further consideration, and their votes are withdrawn when the
//! walk yields a segment.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{LineSegment, Orientation};
use crate::imaging::{BinaryImage, DEFAULT_KERNEL_DIVISOR};

/// Pixels either side of the predicted line that a walk still accepts.
const CORRIDOR: i64 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HoughParams {
    pub rho_resolution: f64,
    pub theta_resolution_deg: f64,
    pub angle_tolerance_deg: f64,
    pub vote_threshold: usize,
    /// `None`: the line-element length, `dimension / DEFAULT_KERNEL_DIVISOR`.
    pub min_length: Option<usize>,
    pub max_gap: usize,
    pub seed: u64,
}

impl Default for HoughParams {
    fn default() -> Self {
        HoughParams {
            rho_resolution: 1.0,
            theta_resolution_deg: 1.0,
            angle_tolerance_deg: 5.0,
            vote_threshold: 50,
            min_length: None,
            max_gap: 5,
            seed: 0,
        }
    }
}

impl HoughParams {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.rho_resolution > 0.0 && self.rho_resolution.is_finite()) {
            return Err(format!("rho_resolution must be positive, got {}", self.rho_resolution));
        }
        if !(self.theta_resolution_deg > 0.0 && self.theta_resolution_deg <= 45.0) {
            return Err(format!(
                "theta_resolution_deg must be in (0, 45], got {}",
                self.theta_resolution_deg
            ));
        }
        if !(0.0..45.0).contains(&self.angle_tolerance_deg) {
            return Err(format!(
                "angle_tolerance_deg must be in [0, 45), got {}",
                self.angle_tolerance_deg
            ));
        }
        if self.vote_threshold == 0 {
            return Err("vote_threshold must be at least 1".into());
        }
        Ok(())
    }
}

/// Segment plus the number of mask pixels its walk collected.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Detection {
    pub segment: LineSegment,
    pub support: usize,
}

pub fn detect_segments(
    mask: &BinaryImage,
    orientation: Orientation,
    params: &HoughParams,
) -> Vec<LineSegment> {
    detect_with_support(mask, orientation, params)
        .into_iter()
        .map(|d| d.segment)
        .collect()
}

/// Pixel grid seen in (major, minor) coordinates.
struct Frame<'a> {
    mask: &'a BinaryImage,
    vertical: bool,
    major_len: usize,
    minor_len: usize,
}

impl Frame<'_> {
    fn index(&self, m: usize, n: usize) -> usize {
        if self.vertical {
            m * self.mask.width() + n
        } else {
            n * self.mask.width() + m
        }
    }
}

pub fn detect_with_support(
    mask: &BinaryImage,
    orientation: Orientation,
    params: &HoughParams,
) -> Vec<Detection> {
    let vertical = orientation == Orientation::Vertical;
    let orientation = if vertical {
        Orientation::Vertical
    } else {
        Orientation::Horizontal
    };
    let (w, h) = (mask.width(), mask.height());
    if w == 0 || h == 0 {
        return Vec::new();
    }
    let frame = Frame {
        mask,
        vertical,
        major_len: if vertical { h } else { w },
        minor_len: if vertical { w } else { h },
    };
    let min_length = params
        .min_length
        .unwrap_or(frame.major_len / DEFAULT_KERNEL_DIVISOR)
        .max(1);

    // Normal angles around pi/2 in the (major, minor) frame.
    let res = params.theta_resolution_deg.max(1e-3).to_radians();
    let steps = (params.angle_tolerance_deg.max(0.0).to_radians() / res + 1e-9).floor() as i64;
    let trig: Vec<(f64, f64)> = (-steps..=steps)
        .map(|k| (std::f64::consts::FRAC_PI_2 + k as f64 * res).sin_cos())
        .collect();
    let rho_res = params.rho_resolution.max(1e-3);
    let rho_max = (w + h) as f64;
    let n_rho = (2.0 * rho_max / rho_res).ceil() as usize + 1;
    let bin = |m: usize, n: usize, (s, c): (f64, f64)| -> usize {
        ((m as f64 * c + n as f64 * s + rho_max) / rho_res).round() as usize
    };

    let mut alive = mask.data().iter().map(|&v| v == 1).collect::<Vec<_>>();
    let mut voted = vec![false; w * h];
    let mut acc = vec![0u32; trig.len() * n_rho];

    let mut points: Vec<(usize, usize)> = Vec::new();
    for n in 0..frame.minor_len {
        for m in 0..frame.major_len {
            if alive[frame.index(m, n)] {
                points.push((m, n));
            }
        }
    }
    points.shuffle(&mut ChaCha8Rng::seed_from_u64(params.seed));

    let mut out = Vec::new();
    for &(m, n) in &points {
        let i = frame.index(m, n);
        if !alive[i] {
            continue;
        }
        voted[i] = true;
        let (mut best_votes, mut best_k) = (0u32, 0usize);
        for (k, &sc) in trig.iter().enumerate() {
            let cell = &mut acc[k * n_rho + bin(m, n, sc)];
            *cell += 1;
            if *cell > best_votes {
                best_votes = *cell;
                best_k = k;
            }
        }
        if (best_votes as usize) < params.vote_threshold {
            continue;
        }

        let (s, c) = trig[best_k];
        let walk = walk(&frame, &alive, (m, n), -c / s, params.max_gap);
        let good = walk.hi - walk.lo >= min_length && walk.pixels.len() >= params.vote_threshold;
        for &(pm, pn) in &walk.pixels {
            let j = frame.index(pm, pn);
            if good && voted[j] {
                for (k, &sc) in trig.iter().enumerate() {
                    acc[k * n_rho + bin(pm, pn, sc)] -= 1;
                }
                voted[j] = false;
            }
            alive[j] = false;
        }
        if !good {
            continue;
        }
        let (a, b) = fit_line(&walk.pixels);
        let p1 = orientation.point(walk.lo as f64, a + b * walk.lo as f64);
        let p2 = orientation.point(walk.hi as f64, a + b * walk.hi as f64);
        if let Ok(segment) = LineSegment::new(p1, p2, orientation) {
            out.push(Detection {
                segment,
                support: walk.pixels.len(),
            });
        }
    }
    out
}

struct Walk {
    lo: usize,
    hi: usize,
    pixels: Vec<(usize, usize)>,
}

fn walk(
    frame: &Frame,
    alive: &[bool],
    (m0, n0): (usize, usize),
    slope: f64,
    max_gap: usize,
) -> Walk {
    let column = |m: usize, centre: f64| -> Vec<(usize, usize)> {
        let c = centre.round() as i64;
        ((c - CORRIDOR).max(0)..=(c + CORRIDOR).min(frame.minor_len as i64 - 1))
            .map(|n| (m, n as usize))
            .filter(|&(m, n)| alive[frame.index(m, n)])
            .collect()
    };
    let mean_minor = |px: &[(usize, usize)]| px.iter().map(|p| p.1 as f64).sum::<f64>() / px.len() as f64;

    let mut pixels = column(m0, n0 as f64);
    let start_centre = mean_minor(&pixels);
    let (mut lo, mut hi) = (m0, m0);
    for dir in [1i64, -1] {
        let (mut anchor_m, mut anchor_n) = (m0 as f64, start_centre);
        let mut gap = 0;
        let mut m = m0 as i64;
        loop {
            m += dir;
            if m < 0 || m >= frame.major_len as i64 {
                break;
            }
            let found = column(m as usize, anchor_n + slope * (m as f64 - anchor_m));
            if found.is_empty() {
                gap += 1;
                if gap > max_gap {
                    break;
                }
                continue;
            }
            gap = 0;
            anchor_m = m as f64;
            anchor_n = mean_minor(&found);
            lo = lo.min(m as usize);
            hi = hi.max(m as usize);
            pixels.extend(found);
        }
    }
    Walk { lo, hi, pixels }
}

/// Least-squares `minor = a + b * major`.
fn fit_line(pixels: &[(usize, usize)]) -> (f64, f64) {
    let n = pixels.len() as f64;
    let mx = pixels.iter().map(|p| p.0 as f64).sum::<f64>() / n;
    let my = pixels.iter().map(|p| p.1 as f64).sum::<f64>() / n;
    let (mut sxx, mut sxy) = (0.0, 0.0);
    for &(x, y) in pixels {
        let dx = x as f64 - mx;
        sxx += dx * dx;
        sxy += dx * (y as f64 - my);
    }
    let b = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    (my - b * mx, b)
}
