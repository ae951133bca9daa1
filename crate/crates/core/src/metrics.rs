//! Evaluation metrics for binary masks: overlap scores, per-object weighted
//! coverage, boundary F-score, and the contour-gap statistic used to stratify
//! test cases by occlusion severity.
//!
//! Components are 8-connected; a boundary pixel is a component pixel with at
//! least one 4-neighbor outside the component or on the image border.

use crate::error::{Error, Result};
use crate::field::RasterMask;

/// Ordered boundary pixels (row, col) of one connected component.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Contour {
    pub pixels: Vec<(usize, usize)>,
}

/// All metrics for one (ground truth, prediction) pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricReport {
    pub iou: f64,
    pub dice: f64,
    pub f1: f64,
    pub wcov: f64,
    pub fbound: f64,
    /// Occlusion distance of the ground truth, in pixels.
    pub occlusion_d: f64,
}

fn binary_check(m: &RasterMask, what: &str) -> Result<()> {
    if !m.is_binary() {
        return Err(Error::invalid(format!("{what}: mask is not binary")));
    }
    Ok(())
}

/// Intersection over union; 1.0 when both masks are empty.
pub fn iou(y: &RasterMask, p: &RasterMask) -> Result<f64> {
    y.shape_check(p, "iou")?;
    binary_check(y, "iou")?;
    binary_check(p, "iou")?;
    let (mut inter, mut union) = (0usize, 0usize);
    for (a, b) in y.values().iter().zip(p.values()) {
        let (a, b) = (*a == 1.0, *b == 1.0);
        inter += (a && b) as usize;
        union += (a || b) as usize;
    }
    Ok(if union == 0 { 1.0 } else { inter as f64 / union as f64 })
}

/// Dice coefficient 2|y∩p| / (|y| + |p|), identical to the pixel F1-score;
/// 1.0 when both masks are empty.
pub fn dice_f1(y: &RasterMask, p: &RasterMask) -> Result<f64> {
    y.shape_check(p, "dice_f1")?;
    binary_check(y, "dice_f1")?;
    binary_check(p, "dice_f1")?;
    let (mut inter, mut total) = (0usize, 0usize);
    for (a, b) in y.values().iter().zip(p.values()) {
        let (a, b) = (*a == 1.0, *b == 1.0);
        inter += (a && b) as usize;
        total += a as usize + b as usize;
    }
    Ok(if total == 0 { 1.0 } else { 2.0 * inter as f64 / total as f64 })
}

/// 8-connected component labels (0 = background) and the component count.
fn connected_components(m: &RasterMask) -> (Vec<u32>, usize) {
    let (h, w) = (m.h(), m.w());
    let mut labels = vec![0u32; h * w];
    let mut next = 0u32;
    let mut stack = Vec::new();
    for start in 0..h * w {
        if m.values()[start] != 1.0 || labels[start] != 0 {
            continue;
        }
        next += 1;
        labels[start] = next;
        stack.push(start);
        while let Some(idx) = stack.pop() {
            let (i, j) = (idx / w, idx % w);
            for di in -1i64..=1 {
                for dj in -1i64..=1 {
                    if di == 0 && dj == 0 {
                        continue;
                    }
                    let (ni, nj) = (i as i64 + di, j as i64 + dj);
                    if ni < 0 || nj < 0 || ni >= h as i64 || nj >= w as i64 {
                        continue;
                    }
                    let nidx = ni as usize * w + nj as usize;
                    if m.values()[nidx] == 1.0 && labels[nidx] == 0 {
                        labels[nidx] = next;
                        stack.push(nidx);
                    }
                }
            }
        }
    }
    (labels, next as usize)
}

/// Boundary pixels of each component: pixels with a 4-neighbor outside the
/// component or on the image border, ordered by greedy 8-adjacent tracing
/// from the top-left pixel.
pub fn extract_contours(y: &RasterMask) -> Vec<Contour> {
    debug_assert!(y.is_binary());
    let (h, w) = (y.h(), y.w());
    let (labels, count) = connected_components(y);
    let mut boundary: Vec<Vec<(usize, usize)>> = vec![Vec::new(); count];
    for i in 0..h {
        for j in 0..w {
            let label = labels[i * w + j];
            if label == 0 {
                continue;
            }
            let mut on_boundary = i == 0 || j == 0 || i == h - 1 || j == w - 1;
            if !on_boundary {
                for (ni, nj) in [(i - 1, j), (i + 1, j), (i, j - 1), (i, j + 1)] {
                    if labels[ni * w + nj] != label {
                        on_boundary = true;
                        break;
                    }
                }
            }
            if on_boundary {
                boundary[(label - 1) as usize].push((i, j));
            }
        }
    }
    boundary.into_iter().map(|pixels| Contour { pixels: trace_order(pixels) }).collect()
}

/// Greedy chain ordering over the 8-adjacency graph of the boundary set.
fn trace_order(pixels: Vec<(usize, usize)>) -> Vec<(usize, usize)> {
    use std::collections::BTreeSet;
    let mut remaining: BTreeSet<(usize, usize)> = pixels.into_iter().collect();
    let mut ordered = Vec::with_capacity(remaining.len());
    while let Some(&start) = remaining.iter().next() {
        remaining.remove(&start);
        ordered.push(start);
        let mut cur = start;
        loop {
            let (i, j) = cur;
            let mut next = None;
            // Clockwise from east; first unvisited boundary neighbor wins.
            for (di, dj) in [(0, 1), (1, 1), (1, 0), (1, -1), (0, -1), (-1, -1), (-1, 0), (-1, 1)] {
                let ni = i as i64 + di;
                let nj = j as i64 + dj;
                if ni < 0 || nj < 0 {
                    continue;
                }
                let cand = (ni as usize, nj as usize);
                if remaining.contains(&cand) {
                    next = Some(cand);
                    break;
                }
            }
            match next {
                Some(p) => {
                    remaining.remove(&p);
                    ordered.push(p);
                    cur = p;
                }
                None => break,
            }
        }
    }
    ordered
}

fn min_pair_distance(a: &[(usize, usize)], b: &[(usize, usize)]) -> f64 {
    let mut best = f64::INFINITY;
    for &(ai, aj) in a {
        for &(bi, bj) in b {
            let di = ai as f64 - bi as f64;
            let dj = aj as f64 - bj as f64;
            best = best.min((di * di + dj * dj).sqrt());
        }
    }
    best
}

/// Max over contour pairs of the minimum point-to-point distance; zero when
/// the mask has fewer than two contours.
pub fn occlusion_distance(y: &RasterMask) -> f64 {
    let contours = extract_contours(y);
    if contours.len() < 2 {
        return 0.0;
    }
    let mut d = 0.0f64;
    for i in 0..contours.len() {
        for j in i + 1..contours.len() {
            d = d.max(min_pair_distance(&contours[i].pixels, &contours[j].pixels));
        }
    }
    d
}

/// Weighted coverage: per ground-truth object, IoU against the predicted
/// component with maximal intersection, weighted by the object's share of the
/// total foreground.
pub fn wcov(y: &RasterMask, p: &RasterMask) -> Result<f64> {
    y.shape_check(p, "wcov")?;
    binary_check(y, "wcov")?;
    binary_check(p, "wcov")?;
    let (labels_y, count_y) = connected_components(y);
    if count_y == 0 {
        return Err(Error::UndefinedMetric(
            "weighted coverage of an empty ground truth".into(),
        ));
    }
    let (labels_p, count_p) = connected_components(p);
    let mut sizes_y = vec![0usize; count_y];
    for &l in &labels_y {
        if l > 0 {
            sizes_y[(l - 1) as usize] += 1;
        }
    }
    let mut sizes_p = vec![0usize; count_p];
    for &l in &labels_p {
        if l > 0 {
            sizes_p[(l - 1) as usize] += 1;
        }
    }
    // intersections[yi][pi]
    let mut inter = vec![vec![0usize; count_p]; count_y];
    for (ly, lp) in labels_y.iter().zip(&labels_p) {
        if *ly > 0 && *lp > 0 {
            inter[(ly - 1) as usize][(lp - 1) as usize] += 1;
        }
    }
    let total: usize = sizes_y.iter().sum();
    let mut cov = 0.0;
    for yi in 0..count_y {
        let best = (0..count_p).max_by_key(|&pi| (inter[yi][pi], std::cmp::Reverse(pi)));
        let obj_iou = match best {
            Some(pi) if inter[yi][pi] > 0 => {
                let i = inter[yi][pi] as f64;
                i / (sizes_y[yi] as f64 + sizes_p[pi] as f64 - i)
            }
            _ => 0.0, // no overlapping prediction: IoU against the empty mask
        };
        cov += sizes_y[yi] as f64 / total as f64 * obj_iou;
    }
    Ok(cov)
}

/// Boundary F-score: mean over distance thresholds 1..=5 of the F1 of
/// boundary-pixel matching; 1.0 when both masks are empty.
pub fn fbound(y: &RasterMask, p: &RasterMask) -> Result<f64> {
    Ok(fbound_per_threshold(y, p)?.iter().sum::<f64>() / 5.0)
}

/// F1 of boundary matching for each threshold in 1..=5 pixels.
pub fn fbound_per_threshold(y: &RasterMask, p: &RasterMask) -> Result<[f64; 5]> {
    y.shape_check(p, "fbound")?;
    binary_check(y, "fbound")?;
    binary_check(p, "fbound")?;
    let by: Vec<(usize, usize)> = extract_contours(y).into_iter().flat_map(|c| c.pixels).collect();
    let bp: Vec<(usize, usize)> = extract_contours(p).into_iter().flat_map(|c| c.pixels).collect();
    if by.is_empty() && bp.is_empty() {
        return Ok([1.0; 5]);
    }
    let nearest = |from: &[(usize, usize)], to: &[(usize, usize)]| -> Vec<f64> {
        from.iter()
            .map(|&(i, j)| {
                let mut best = f64::INFINITY;
                for &(ti, tj) in to {
                    let di = i as f64 - ti as f64;
                    let dj = j as f64 - tj as f64;
                    best = best.min((di * di + dj * dj).sqrt());
                }
                best
            })
            .collect()
    };
    let dp = nearest(&bp, &by);
    let dy = nearest(&by, &bp);
    let mut out = [0.0; 5];
    for (t, slot) in out.iter_mut().enumerate() {
        let theta = (t + 1) as f64;
        let precision = if dp.is_empty() {
            0.0
        } else {
            dp.iter().filter(|&&d| d <= theta).count() as f64 / dp.len() as f64
        };
        let recall = if dy.is_empty() {
            0.0
        } else {
            dy.iter().filter(|&&d| d <= theta).count() as f64 / dy.len() as f64
        };
        *slot = if precision + recall == 0.0 {
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
    }
    Ok(out)
}

/// All metrics for one pair. Weighted coverage requires a non-empty ground
/// truth; shape or binarity violations surface as invalid-argument errors.
pub fn evaluate(y: &RasterMask, p: &RasterMask) -> Result<MetricReport> {
    let dice = dice_f1(y, p)?;
    Ok(MetricReport {
        iou: iou(y, p)?,
        dice,
        f1: dice,
        wcov: wcov(y, p)?,
        fbound: fbound(y, p)?,
        occlusion_d: occlusion_distance(y),
    })
}

/// Case indices and mean IoU of one occlusion stratum.
#[derive(Debug, Clone, PartialEq)]
pub struct OcclusionStratum {
    pub indices: Vec<usize>,
    pub mean_iou: Option<f64>,
}

/// Cases split by ground-truth occlusion distance: d = 0, 0 < d <= threshold,
/// d > threshold.
#[derive(Debug, Clone, PartialEq)]
pub struct OcclusionStrata {
    pub threshold: f64,
    pub zero: OcclusionStratum,
    pub moderate: OcclusionStratum,
    pub severe: OcclusionStratum,
}

/// Partition (ground truth, prediction) pairs by occlusion distance and
/// report the mean IoU per stratum.
pub fn stratify_by_occlusion(
    cases: &[(RasterMask, RasterMask)],
    threshold: f64,
) -> Result<OcclusionStrata> {
    let mut bins: [(Vec<usize>, f64); 3] = [(Vec::new(), 0.0), (Vec::new(), 0.0), (Vec::new(), 0.0)];
    for (idx, (y, p)) in cases.iter().enumerate() {
        let d = occlusion_distance(y);
        let score = iou(y, p)?;
        let slot = if d == 0.0 {
            0
        } else if d <= threshold {
            1
        } else {
            2
        };
        bins[slot].0.push(idx);
        bins[slot].1 += score;
    }
    let build = |(indices, sum): (Vec<usize>, f64)| {
        let mean_iou = if indices.is_empty() {
            None
        } else {
            Some(sum / indices.len() as f64)
        };
        OcclusionStratum { indices, mean_iou }
    };
    let [zero, moderate, severe] = bins;
    Ok(OcclusionStrata {
        threshold,
        zero: build(zero),
        moderate: build(moderate),
        severe: build(severe),
    })
}
