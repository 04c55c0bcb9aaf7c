//! Histogram-based global thresholding.
//!
//! For a threshold `t` the background class holds intensities `0..=t` and the
//! foreground class `t+1..=255`. With `p(i) = n_i / N`:
//!
//! ```text
//! w_bg(t) = sum_{i<=t} p(i)           w_fg(t) = 1 - w_bg(t)
//! mu_bg(t) = sum_{i<=t} i p(i) / w_bg  mu_fg(t) = sum_{i>t} i p(i) / w_fg
//! var_b(t) = w_bg w_fg (mu_bg - mu_fg)^2
//! ```
//!
//! In integer form, with `B`, `F` the class pixel counts, `S_b` the background
//! intensity sum and `S` the total intensity sum,
//! `var_b(t) = (S_b N - S B)^2 / (N^2 B F)`. The argmax is taken on that exact
//! rational so ties resolve to the smallest `t` regardless of rounding.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;

use super::{BinaryImage, GrayImage, ImagingError, LEVELS};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Histogram {
    counts: [u64; LEVELS],
    total: u64,
}

impl Histogram {
    pub fn from_counts(counts: [u64; LEVELS]) -> Result<Self, ImagingError> {
        let total: u64 = counts.iter().sum();
        if total == 0 {
            return Err(ImagingError::EmptyImage);
        }
        Ok(Histogram { counts, total })
    }

    pub fn counts(&self) -> &[u64; LEVELS] {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    /// Normalized probability of intensity `i`.
    pub fn p(&self, i: usize) -> f64 {
        self.counts[i] as f64 / self.total as f64
    }

    pub fn mean(&self) -> f64 {
        let s: u128 = self
            .counts
            .iter()
            .enumerate()
            .map(|(i, &c)| i as u128 * c as u128)
            .sum();
        s as f64 / self.total as f64
    }

    /// Pixels with intensity `<= t`.
    pub fn mass_at_or_below(&self, t: u8) -> u64 {
        self.counts[..=t as usize].iter().sum()
    }
}

pub fn compute_histogram(img: &GrayImage) -> Result<Histogram, ImagingError> {
    if img.is_empty() {
        return Err(ImagingError::EmptyImage);
    }
    let mut counts = [0u64; LEVELS];
    for &v in img.data() {
        counts[v as usize] += 1;
    }
    Histogram::from_counts(counts)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OtsuResult {
    pub threshold: u8,
    pub between_class_variance: f64,
}

/// Class weights and means at threshold `t`, in floating point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassStats {
    pub w_bg: f64,
    pub w_fg: f64,
    pub mu_bg: f64,
    pub mu_fg: f64,
}

impl ClassStats {
    pub fn between_class_variance(&self) -> f64 {
        let d = self.mu_bg - self.mu_fg;
        self.w_bg * self.w_fg * d * d
    }
}

/// Class statistics at `t`. An empty class gets mean 0.
pub fn class_stats(hist: &Histogram, t: u8) -> ClassStats {
    let (mut w_bg, mut m_bg, mut w_fg, mut m_fg) = (0.0, 0.0, 0.0, 0.0);
    for i in 0..LEVELS {
        let p = hist.p(i);
        if i <= t as usize {
            w_bg += p;
            m_bg += i as f64 * p;
        } else {
            w_fg += p;
            m_fg += i as f64 * p;
        }
    }
    ClassStats {
        w_bg,
        w_fg,
        mu_bg: if w_bg > 0.0 { m_bg / w_bg } else { 0.0 },
        mu_fg: if w_fg > 0.0 { m_fg / w_fg } else { 0.0 },
    }
}

/// Threshold maximizing the between-class variance over `t in 0..=254`.
pub fn otsu_threshold(hist: &Histogram) -> Result<OtsuResult, ImagingError> {
    let n = hist.total as i128;
    let s: i128 = hist
        .counts
        .iter()
        .enumerate()
        .map(|(i, &c)| i as i128 * c as i128)
        .sum();

    // best = (t, numerator D^2, denominator B*F); the common N^2 is dropped.
    let mut best: Option<(u8, BigInt, BigInt)> = None;
    let (mut b, mut s_b) = (0i128, 0i128);
    for t in 0..LEVELS - 1 {
        b += hist.counts[t] as i128;
        s_b += t as i128 * hist.counts[t] as i128;
        let f = n - b;
        if b == 0 || f == 0 {
            continue;
        }
        let d = BigInt::from(s_b * n - s * b);
        let num = &d * &d;
        let den = BigInt::from(b) * BigInt::from(f);
        let better = match &best {
            None => true,
            Some((_, bn, bd)) => &num * bd > bn * &den,
        };
        if better {
            best = Some((t as u8, num, den));
        }
    }

    let (threshold, num, den) = best.ok_or_else(|| {
        let only = hist.counts.iter().position(|&c| c > 0).unwrap_or(0);
        ImagingError::DegenerateHistogram(only as u8)
    })?;
    let n2 = BigInt::from(n) * BigInt::from(n);
    let variance = BigRational::new(num, den * n2);
    Ok(OtsuResult {
        threshold,
        between_class_variance: variance.to_f64().unwrap_or(f64::NAN),
    })
}

/// Thresholds `img` at `t`. With `ink_is_dark`, pixels `<= t` become 1.
pub fn binarize(img: &GrayImage, t: u8, ink_is_dark: bool) -> BinaryImage {
    BinaryImage {
        width: img.width(),
        height: img.height(),
        data: img
            .data()
            .iter()
            .map(|&v| ((v <= t) == ink_is_dark) as u8)
            .collect(),
    }
}
