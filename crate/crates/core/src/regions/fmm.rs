//! First-order fast marching for `sqrt(∇d · M ∇d) = 1` on the periodic grid, `M = k⁻¹`.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::form::SymForm;
use crate::grid::SpatialGrid;
use crate::scalar::Real;

#[derive(Clone, Copy, PartialEq, Eq)]
enum State {
    Far,
    Trial,
    Known,
}

struct Entry<T> {
    value: T,
    idx: usize,
}

impl<T: Real> PartialEq for Entry<T> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl<T: Real> Eq for Entry<T> {}

impl<T: Real> PartialOrd for Entry<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<T: Real> Ord for Entry<T> {
    // reversed: BinaryHeap is a max-heap
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .value
            .partial_cmp(&self.value)
            .unwrap_or(Ordering::Equal)
            .then_with(|| other.idx.cmp(&self.idx))
    }
}

/// Inverse optical forms per node, or the Euclidean metric.
#[derive(Clone, Copy)]
pub(crate) enum Speed<'a, T> {
    Euclidean,
    Field(&'a [SymForm<T>]),
}

impl<T: Real> Speed<'_, T> {
    fn at(&self, dim: usize, idx: usize) -> SymForm<T> {
        match self {
            Speed::Euclidean => SymForm::identity(dim),
            Speed::Field(m) => m[idx],
        }
    }
}

fn is_inside<T: Real>(s: T) -> bool {
    s > T::zero()
}

/// Unsigned metric distance from every node to the zero level set of `sdf`.
/// Returns `+∞` everywhere when the level set has no crossing on the grid.
pub(crate) fn distance_to_interface<T: Real>(grid: &SpatialGrid<T>, sdf: &[T], speed: Speed<'_, T>) -> Vec<T> {
    let n = grid.len();
    let dim = grid.dim();
    let h = grid.spacing();
    let two = T::lit(2.0);
    let mut dist = vec![T::infinity(); n];
    let mut state = vec![State::Far; n];
    let mut heap = BinaryHeap::new();

    for idx in 0..n {
        let s = sdf[idx];
        let inside = is_inside(s);
        let minv = speed.at(dim, idx);
        let metric = minv.inverse().unwrap_or_else(|| SymForm::identity(dim));
        let mut interface = false;
        let mut cap = T::infinity();
        let mut g = [T::zero(); 2];
        for (axis, gc) in g.iter_mut().enumerate().take(dim) {
            let f = grid.neighbor(idx, axis, true);
            let b = grid.neighbor(idx, axis, false);
            let cross_f = is_inside(sdf[f]) != inside;
            let cross_b = is_inside(sdf[b]) != inside;
            *gc = (sdf[f] - sdf[b]) / (two * h);
            if !(cross_f || cross_b) {
                continue;
            }
            interface = true;
            // one-sided toward the steeper crossing: central differences vanish across thin gaps
            let (nb, sign) = if cross_f && (!cross_b || (sdf[f] - s).abs() >= (sdf[b] - s).abs()) {
                (f, T::one())
            } else {
                (b, -T::one())
            };
            let jump = sdf[nb] - s;
            *gc = sign * jump / h;
            let theta = (s / jump).abs().min(T::one());
            let axis_len = match axis {
                0 => metric.xx(),
                _ => metric.yy(),
            };
            cap = cap.min(theta * h * axis_len.sqrt());
        }
        if !interface {
            continue;
        }
        let norm2 = minv.quad(&g);
        let d0 = if norm2 > T::epsilon() {
            (s.abs() / norm2.sqrt()).min(cap)
        } else {
            T::zero()
        };
        dist[idx] = d0;
        state[idx] = State::Known;
    }
    // seed the narrow band around the interface
    for idx in 0..n {
        if state[idx] == State::Known {
            for nb in neighbors(grid, idx) {
                if state[nb] == State::Far {
                    push_update(grid, &mut dist, &mut state, &mut heap, speed, nb);
                }
            }
        }
    }
    while let Some(Entry { value, idx }) = heap.pop() {
        if state[idx] == State::Known || value > dist[idx] {
            continue;
        }
        state[idx] = State::Known;
        for nb in neighbors(grid, idx) {
            if state[nb] != State::Known {
                push_update(grid, &mut dist, &mut state, &mut heap, speed, nb);
            }
        }
    }
    dist
}

fn neighbors<T: Real>(grid: &SpatialGrid<T>, idx: usize) -> impl Iterator<Item = usize> + '_ {
    (0..grid.dim()).flat_map(move |axis| [grid.neighbor(idx, axis, false), grid.neighbor(idx, axis, true)])
}

fn push_update<T: Real>(
    grid: &SpatialGrid<T>,
    dist: &mut [T],
    state: &mut [State],
    heap: &mut BinaryHeap<Entry<T>>,
    speed: Speed<'_, T>,
    idx: usize,
) {
    let u = local_update(grid, dist, state, speed, idx);
    if u < dist[idx] {
        dist[idx] = u;
        state[idx] = State::Trial;
        heap.push(Entry { value: u, idx });
    }
}

fn local_update<T: Real>(grid: &SpatialGrid<T>, dist: &[T], state: &[State], speed: Speed<'_, T>, idx: usize) -> T {
    let dim = grid.dim();
    let h = grid.spacing();
    let m = speed.at(dim, idx);
    let known = |j: usize| if state[j] == State::Known { dist[j] } else { T::infinity() };
    let mut best = T::infinity();
    let xs = [
        (known(grid.neighbor(idx, 0, false)), T::one()),
        (known(grid.neighbor(idx, 0, true)), -T::one()),
    ];
    for &(a, _) in &xs {
        if a.is_finite() {
            best = best.min(a + h / m.xx().sqrt());
        }
    }
    if dim == 1 {
        return best;
    }
    let ys = [
        (known(grid.neighbor(idx, 1, false)), T::one()),
        (known(grid.neighbor(idx, 1, true)), -T::one()),
    ];
    for &(b, _) in &ys {
        if b.is_finite() {
            best = best.min(b + h / m.yy().sqrt());
        }
    }
    for &(a, sx) in &xs {
        if !a.is_finite() {
            continue;
        }
        for &(b, sy) in &ys {
            if !b.is_finite() {
                continue;
            }
            if let Some(u) = two_sided(m, a, b, sx * sy, h) {
                best = best.min(u);
            }
        }
    }
    best
}

/// Solves `m11 X² + 2 m12' X Y + m22 Y² = h²` for `u`, with `X = u − a`, `Y = u − b`,
/// accepting the root only if the characteristic comes from the two known neighbours.
fn two_sided<T: Real>(m: SymForm<T>, a: T, b: T, sign: T, h: T) -> Option<T> {
    let m11 = m.xx();
    let m22 = m.yy();
    let m12 = m.xy() * sign;
    let two = T::lit(2.0);
    let qa = m11 + two * m12 + m22;
    let qb = -two * (m11 * a + m12 * (a + b) + m22 * b);
    let qc = m11 * a * a + two * m12 * a * b + m22 * b * b - h * h;
    if qa <= T::zero() {
        return None;
    }
    let disc = qb * qb - T::lit(4.0) * qa * qc;
    if disc < T::zero() {
        return None;
    }
    let u = (-qb + disc.sqrt()) / (two * qa);
    let x = u - a;
    let y = u - b;
    if x < T::zero() || y < T::zero() {
        return None;
    }
    if m11 * x + m12 * y < T::zero() || m12 * x + m22 * y < T::zero() {
        return None;
    }
    Some(u)
}
