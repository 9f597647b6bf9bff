//! Distance-transform watershed on the free-space mask.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, VecDeque};

pub(crate) const NO_LABEL: i32 = -1;

const N4: [(i64, i64); 4] = [(0, 1), (1, 0), (0, -1), (-1, 0)];

fn neighbors4(idx: usize, w: usize, h: usize) -> impl Iterator<Item = usize> {
    let (r, c) = ((idx / w) as i64, (idx % w) as i64);
    N4.iter().filter_map(move |&(dr, dc)| {
        let (nr, nc) = (r + dr, c + dc);
        (nr >= 0 && nc >= 0 && nr < h as i64 && nc < w as i64).then(|| nr as usize * w + nc as usize)
    })
}

/// Turns small enclosed obstacle components into free space.
///
/// Components touching the grid border are always kept.
pub(crate) fn fill_small_obstacles(free: &mut [bool], w: usize, h: usize, max_cells: usize) {
    if max_cells == 0 {
        return;
    }
    let mut seen = vec![false; w * h];
    let mut queue = VecDeque::new();
    let mut comp = Vec::new();
    for start in 0..w * h {
        if free[start] || seen[start] {
            continue;
        }
        comp.clear();
        let mut touches_border = false;
        seen[start] = true;
        queue.push_back(start);
        while let Some(i) = queue.pop_front() {
            comp.push(i);
            let (r, c) = ((i / w) as i64, (i % w) as i64);
            if r == 0 || c == 0 || r == h as i64 - 1 || c == w as i64 - 1 {
                touches_border = true;
            }
            for dr in -1..=1i64 {
                for dc in -1..=1i64 {
                    let (nr, nc) = (r + dr, c + dc);
                    if nr < 0 || nc < 0 || nr >= h as i64 || nc >= w as i64 {
                        continue;
                    }
                    let j = nr as usize * w + nc as usize;
                    if !free[j] && !seen[j] {
                        seen[j] = true;
                        queue.push_back(j);
                    }
                }
            }
        }
        if !touches_border && comp.len() <= max_cells {
            for &i in &comp {
                free[i] = true;
            }
        }
    }
}

/// Labels 4-connected components of `mask` in row-major discovery order.
pub(crate) fn components(mask: &[bool], w: usize, h: usize) -> (Vec<i32>, usize) {
    let mut labels = vec![NO_LABEL; w * h];
    let mut next = 0i32;
    let mut queue = VecDeque::new();
    for start in 0..w * h {
        if !mask[start] || labels[start] != NO_LABEL {
            continue;
        }
        labels[start] = next;
        queue.push_back(start);
        while let Some(i) = queue.pop_front() {
            for j in neighbors4(i, w, h) {
                if mask[j] && labels[j] == NO_LABEL {
                    labels[j] = next;
                    queue.push_back(j);
                }
            }
        }
        next += 1;
    }
    (labels, next as usize)
}

/// Seeds every component of `core` and floods the remaining free cells from
/// the highest clearance downwards. Each cell joins the first labelled
/// neighbour to reach it; free cells with no path to a core stay unlabelled.
pub(crate) fn watershed(free: &[bool], sqdist: &[u32], core: &[bool], w: usize, h: usize) -> (Vec<i32>, usize) {
    let (mut labels, n) = components(core, w, h);
    let mut heap = BinaryHeap::new();
    let mut seq = 0u64;
    for (i, &l) in labels.iter().enumerate() {
        if l != NO_LABEL {
            heap.push((sqdist[i], Reverse(seq), i));
            seq += 1;
        }
    }
    while let Some((_, _, i)) = heap.pop() {
        let l = labels[i];
        for j in neighbors4(i, w, h) {
            if free[j] && labels[j] == NO_LABEL {
                labels[j] = l;
                heap.push((sqdist[j], Reverse(seq), j));
                seq += 1;
            }
        }
    }
    (labels, n)
}

/// Merges regions smaller than `min_cells` into their largest 4-neighbour
/// region, smallest first. Regions without neighbours are dropped. Returns
/// the labels renumbered densely in row-major order of first appearance.
pub(crate) fn merge_small_regions(labels: &mut [i32], n: usize, w: usize, h: usize, min_cells: usize) -> usize {
    let mut sizes = vec![0usize; n];
    for &l in labels.iter() {
        if l >= 0 {
            sizes[l as usize] += 1;
        }
    }
    loop {
        let victim = (0..n)
            .filter(|&l| sizes[l] > 0 && sizes[l] < min_cells)
            .min_by_key(|&l| (sizes[l], l));
        let Some(victim) = victim else { break };
        let mut neighbor_labels = Vec::new();
        for i in 0..w * h {
            if labels[i] != victim as i32 {
                continue;
            }
            for j in neighbors4(i, w, h) {
                let lj = labels[j];
                if lj >= 0 && lj != victim as i32 {
                    neighbor_labels.push(lj as usize);
                }
            }
        }
        neighbor_labels.sort_unstable();
        neighbor_labels.dedup();
        let target = neighbor_labels.iter().copied().max_by_key(|&l| (sizes[l], Reverse(l)));
        let new_label = target.map_or(NO_LABEL, |t| t as i32);
        for l in labels.iter_mut() {
            if *l == victim as i32 {
                *l = new_label;
            }
        }
        if let Some(t) = target {
            sizes[t] += sizes[victim];
        }
        sizes[victim] = 0;
    }
    relabel_dense(labels)
}

pub(crate) fn relabel_dense(labels: &mut [i32]) -> usize {
    let mut map = std::collections::BTreeMap::new();
    let mut next = 0i32;
    for l in labels.iter_mut() {
        if *l < 0 {
            continue;
        }
        let v = *map.entry(*l).or_insert_with(|| {
            let v = next;
            next += 1;
            v
        });
        *l = v;
    }
    next as usize
}

/// Removes diagonal-only contacts ("pinches") where two cells with the same
/// label touch at a corner while both other cells of the 2×2 block differ.
///
/// Works on a grid padded with a `NO_LABEL` frame; frame cells are never
/// modified. Returns false if pinches remain after the pass limit.
pub(crate) fn remove_pinches(padded: &mut [i32], pw: usize, ph: usize) -> bool {
    let inner = |r: usize, c: usize| r > 0 && c > 0 && r < ph - 1 && c < pw - 1;
    for _ in 0..32 {
        let mut changed = false;
        for r in 0..ph - 1 {
            for c in 0..pw - 1 {
                let cells = [(r, c), (r, c + 1), (r + 1, c), (r + 1, c + 1)];
                let lab = |k: usize| padded[cells[k].0 * pw + cells[k].1];
                // Diagonals: (0, 3) and (1, 2).
                for (d0, d1, o0, o1) in [(0, 3, 1, 2), (1, 2, 0, 3)] {
                    let x = lab(d0);
                    if lab(d1) != x || lab(o0) == x || lab(o1) == x {
                        continue;
                    }
                    if x >= 0 {
                        let (tr, tc) = cells[o0];
                        let k = if inner(tr, tc) { o0 } else { o1 };
                        let (tr, tc) = cells[k];
                        padded[tr * pw + tc] = x;
                    } else {
                        let y = lab(o0);
                        let (tr, tc) = cells[d0];
                        let k = if inner(tr, tc) { d0 } else { d1 };
                        let (tr, tc) = cells[k];
                        padded[tr * pw + tc] = y;
                    }
                    changed = true;
                    break;
                }
            }
        }
        if !changed {
            return true;
        }
    }
    false
}
