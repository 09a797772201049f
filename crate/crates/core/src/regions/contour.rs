//! Zero-level-set extraction (marching squares on the torus) and Hausdorff distance.

use std::collections::HashMap;

use crate::form::Point;
use crate::grid::SpatialGrid;
use crate::scalar::Real;

/// Boundary segment lying inside one grid square, in unwrapped coordinates.
#[derive(Debug, Clone, Copy)]
pub struct Segment<T> {
    pub a: Point<T>,
    pub b: Point<T>,
    ka: (usize, usize),
    kb: (usize, usize),
}

fn crossing<T: Real>(pa: Point<T>, pb: Point<T>, sa: T, sb: T) -> Point<T> {
    let w = sa / (sa - sb);
    [pa[0] + (pb[0] - pa[0]) * w, pa[1] + (pb[1] - pa[1]) * w]
}

fn key(i: usize, j: usize) -> (usize, usize) {
    (i.min(j), i.max(j))
}

/// All boundary segments of `{sdf > 0}`. In one dimension each crossing is a degenerate segment.
pub fn segments<T: Real>(grid: &SpatialGrid<T>, sdf: &[T]) -> Vec<Segment<T>> {
    let n = grid.cells();
    let h = grid.spacing();
    let inside = |v: T| v > T::zero();
    let mut out = Vec::new();
    if grid.dim() == 1 {
        for i in 0..n {
            let j = (i + 1) % n;
            if inside(sdf[i]) != inside(sdf[j]) {
                let x0 = T::from_usize_lossy(i) * h;
                let p = crossing([x0, T::zero()], [x0 + h, T::zero()], sdf[i], sdf[j]);
                out.push(Segment { a: p, b: p, ka: key(i, j), kb: key(i, j) });
            }
        }
        return out;
    }
    for j in 0..n {
        for i in 0..n {
            let (i1, j1) = ((i + 1) % n, (j + 1) % n);
            let idx = [grid.index(i, j), grid.index(i1, j), grid.index(i1, j1), grid.index(i, j1)];
            let s = idx.map(|k| sdf[k]);
            let mask = s.iter().enumerate().fold(0u8, |m, (c, &v)| m | ((inside(v) as u8) << c));
            if mask == 0 || mask == 15 {
                continue;
            }
            let x0 = T::from_usize_lossy(i) * h;
            let y0 = T::from_usize_lossy(j) * h;
            let p = [[x0, y0], [x0 + h, y0], [x0 + h, y0 + h], [x0, y0 + h]];
            // edge e joins corner e and corner e+1
            let edge = |e: usize| {
                let c = (e + 1) % 4;
                (crossing(p[e], p[c], s[e], s[c]), key(idx[e], idx[c]))
            };
            let cut = |e: usize| inside(s[e]) != inside(s[(e + 1) % 4]);
            let cuts: Vec<usize> = (0..4).filter(|&e| cut(e)).collect();
            let pairs: Vec<(usize, usize)> = if cuts.len() == 2 {
                vec![(cuts[0], cuts[1])]
            } else {
                // saddle: resolved by the value at the square centre
                let centre = (s[0] + s[1] + s[2] + s[3]) / T::lit(4.0);
                let corner0_joined = inside(centre) == inside(s[0]);
                if corner0_joined {
                    // corner 0 connects diagonally to corner 2; separate corners 1 and 3
                    vec![(0, 1), (2, 3)]
                } else {
                    vec![(3, 0), (1, 2)]
                }
            };
            for (e1, e2) in pairs {
                let (a, ka) = edge(e1);
                let (b, kb) = edge(e2);
                out.push(Segment { a, b, ka, kb });
            }
        }
    }
    out
}

/// Boundary polylines with vertices wrapped into the fundamental domain. Closed loops repeat
/// their first vertex at the end.
pub fn polylines<T: Real>(grid: &SpatialGrid<T>, sdf: &[T]) -> Vec<Vec<Point<T>>> {
    let segs = segments(grid, sdf);
    if grid.dim() == 1 {
        return segs.iter().map(|s| vec![s.a]).collect();
    }
    let mut by_key: HashMap<(usize, usize), Vec<usize>> = HashMap::new();
    for (k, s) in segs.iter().enumerate() {
        by_key.entry(s.ka).or_default().push(k);
        by_key.entry(s.kb).or_default().push(k);
    }
    let mut used = vec![false; segs.len()];
    let mut lines = Vec::new();
    for start in 0..segs.len() {
        if used[start] {
            continue;
        }
        used[start] = true;
        let mut line = vec![grid.wrap(&segs[start].a), grid.wrap(&segs[start].b)];
        let first_key = segs[start].ka;
        let mut tail = segs[start].kb;
        loop {
            let next = by_key
                .get(&tail)
                .and_then(|c| c.iter().copied().find(|&k| !used[k]));
            let Some(k) = next else { break };
            used[k] = true;
            let s = &segs[k];
            let (p, nk) = if s.ka == tail { (s.b, s.kb) } else { (s.a, s.ka) };
            line.push(grid.wrap(&p));
            tail = nk;
            if tail == first_key {
                break;
            }
        }
        lines.push(line);
    }
    lines
}

fn point_segment_distance<T: Real>(grid: &SpatialGrid<T>, p: &Point<T>, s: &Segment<T>) -> T {
    let d = grid.displacement(&s.a, p);
    let q = [s.a[0] + d[0], s.a[1] + d[1]];
    let e = [s.b[0] - s.a[0], s.b[1] - s.a[1]];
    let len2 = e[0] * e[0] + e[1] * e[1];
    let w = if len2 > T::zero() {
        (((q[0] - s.a[0]) * e[0] + (q[1] - s.a[1]) * e[1]) / len2).max(T::zero()).min(T::one())
    } else {
        T::zero()
    };
    let c = [s.a[0] + e[0] * w - q[0], s.a[1] + e[1] * w - q[1]];
    (c[0] * c[0] + c[1] * c[1]).sqrt()
}

fn directed<T: Real>(grid: &SpatialGrid<T>, from: &[Segment<T>], to: &[Segment<T>]) -> T {
    let mut worst = T::zero();
    for s in from {
        for p in [&s.a, &s.b] {
            let near = to
                .iter()
                .map(|t| point_segment_distance(grid, p, t))
                .fold(T::infinity(), T::min);
            worst = worst.max(near);
        }
    }
    worst
}

/// Symmetric Hausdorff distance between two boundary sets; `+∞` if exactly one is empty.
pub(crate) fn hausdorff_segments<T: Real>(grid: &SpatialGrid<T>, a: &[Segment<T>], b: &[Segment<T>]) -> T {
    match (a.is_empty(), b.is_empty()) {
        (true, true) => T::zero(),
        (true, false) | (false, true) => T::infinity(),
        _ => directed(grid, a, b).max(directed(grid, b, a)),
    }
}
