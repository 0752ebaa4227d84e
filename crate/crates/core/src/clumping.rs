//! Gradient-ascent clump segmentation in the style of FellWalker.
//!
//! Every usable voxel walks uphill to its steepest neighbour until it either
//! reaches a local peak, which starts a new clump, or runs into a voxel
//! that already has a label, which the whole walk then adopts. Adjacent
//! clumps separated by a shallow dip are merged afterwards, and clumps
//! below the minimum size are dissolved back into the background.
//!
//! Voxels are totally ordered by `(value, -linear_index)`. The steepest
//! neighbour is the maximum under that order, so equal values resolve
//! toward the lowest linear index and plateaus cannot stall a walk.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BinaryHeap, HashMap};
use std::str::FromStr;

use ndarray::Array3;
use serde::{Deserialize, Serialize};

use crate::cube::{Cube, Dims};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Neighborhood {
    /// 6 face neighbours.
    Faces,
    /// All 26 neighbours in the 3×3×3 block.
    #[default]
    Full,
}

impl Neighborhood {
    pub fn offsets(self) -> Vec<[isize; 3]> {
        let mut out = Vec::with_capacity(26);
        for a in -1isize..=1 {
            for b in -1isize..=1 {
                for c in -1isize..=1 {
                    let manhattan = a.abs() + b.abs() + c.abs();
                    let keep = match self {
                        Neighborhood::Faces => manhattan == 1,
                        Neighborhood::Full => manhattan > 0,
                    };
                    if keep {
                        out.push([a, b, c]);
                    }
                }
            }
        }
        out
    }
}

impl FromStr for Neighborhood {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "6" | "faces" => Ok(Neighborhood::Faces),
            "26" | "full" => Ok(Neighborhood::Full),
            _ => Err(Error::InvalidParameter(format!("unknown neighborhood {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClumpParams {
    pub rms: f64,
    /// Voxels below `noise_mult * rms` are background.
    pub noise_mult: f64,
    /// Adjacent clumps whose dip is below `min_dip_mult * rms` are merged.
    pub min_dip_mult: f64,
    pub min_pix: usize,
    pub neighborhood: Neighborhood,
}

impl ClumpParams {
    pub const DEFAULT_NOISE_MULT: f64 = 2.0;
    pub const DEFAULT_MIN_DIP_MULT: f64 = 3.0;
    pub const DEFAULT_MIN_PIX: usize = 16;

    pub fn with_rms(rms: f64) -> Self {
        ClumpParams {
            rms,
            noise_mult: Self::DEFAULT_NOISE_MULT,
            min_dip_mult: Self::DEFAULT_MIN_DIP_MULT,
            min_pix: Self::DEFAULT_MIN_PIX,
            neighborhood: Neighborhood::Full,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.rms.is_finite() || self.rms <= 0.0 {
            return Err(Error::InvalidParameter(format!("rms must be positive, got {}", self.rms)));
        }
        for (name, v) in [("noise_mult", self.noise_mult), ("min_dip_mult", self.min_dip_mult)] {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::InvalidParameter(format!("{name} must be finite and >= 0, got {v}")));
            }
        }
        if self.min_pix < 1 {
            return Err(Error::InvalidParameter("min_pix must be at least 1".into()));
        }
        Ok(())
    }

    pub fn threshold(&self) -> f64 {
        self.noise_mult * self.rms
    }
}

/// Clump assignment array: one label per voxel, 0 for background.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Caa {
    pub labels: Array3<i32>,
    pub n_clumps: usize,
}

impl Caa {
    pub fn dims(&self) -> Dims {
        crate::cube::dims_of(&self.labels)
    }

    pub fn label_at(&self, idx: Dims) -> i32 {
        self.labels[idx]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Clump {
    pub id: u32,
    pub level: usize,
    pub voxels: Vec<Dims>,
    pub peak_pos: Dims,
    pub peak_val: f64,
    pub total_intensity: f64,
    pub centroid: [f64; 3],
}

impl Clump {
    pub fn n_pix(&self) -> usize {
        self.voxels.len()
    }
}

/// `(n_clumps, biggest_pix, mean_pix)` over a catalog.
pub fn clump_metrics(clumps: &[Clump]) -> (usize, usize, f64) {
    if clumps.is_empty() {
        return (0, 0, 0.0);
    }
    let biggest = clumps.iter().map(Clump::n_pix).max().unwrap_or(0);
    let total: usize = clumps.iter().map(Clump::n_pix).sum();
    (clumps.len(), biggest, total as f64 / clumps.len() as f64)
}

struct Grid<'a> {
    values: &'a [f64],
    dims: Dims,
    offsets: Vec<[isize; 3]>,
}

impl Grid<'_> {
    #[inline]
    fn coords(&self, i: usize) -> Dims {
        let [_, d1, d2] = self.dims;
        [i / (d1 * d2), (i / d2) % d1, i % d2]
    }

    #[inline]
    fn linear(&self, [a, b, c]: Dims) -> usize {
        (a * self.dims[1] + b) * self.dims[2] + c
    }

    /// `a` ranks above `b` in the voxel order.
    #[inline]
    fn above(&self, a: usize, b: usize) -> bool {
        let (va, vb) = (self.values[a], self.values[b]);
        va > vb || (va == vb && a < b)
    }

    fn neighbors(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        let p = self.coords(i);
        self.offsets.iter().filter_map(move |o| {
            let mut q = [0usize; 3];
            for ax in 0..3 {
                let v = p[ax] as isize + o[ax];
                if v < 0 || v >= self.dims[ax] as isize {
                    return None;
                }
                q[ax] = v as usize;
            }
            Some(self.linear(q))
        })
    }
}

#[derive(Debug, Clone, Copy)]
struct MergeCandidate {
    dip: f64,
    a: usize,
    b: usize,
}

impl PartialEq for MergeCandidate {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for MergeCandidate {}

impl PartialOrd for MergeCandidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for MergeCandidate {
    // reversed so BinaryHeap pops the smallest dip first
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .dip
            .total_cmp(&self.dip)
            .then_with(|| other.a.cmp(&self.a))
            .then_with(|| other.b.cmp(&self.b))
    }
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

/// Segments `cube` into clumps. The result is deterministic: voxels are
/// scanned in storage order (axis 2 fastest) and ties go to the lowest
/// linear index.
pub fn fellwalker(cube: &Cube, params: &ClumpParams) -> Result<(Caa, Vec<Clump>)> {
    params.validate()?;
    let data = cube.data().as_standard_layout();
    let values = data.as_slice().expect("standard layout");
    let blank = cube.blank_mask().as_standard_layout();
    let blank = blank.as_slice().expect("standard layout");
    let grid = Grid {
        values,
        dims: cube.dims(),
        offsets: params.neighborhood.offsets(),
    };
    let n = values.len();
    let threshold = params.threshold();
    let usable: Vec<bool> = (0..n).map(|i| !blank[i] && values[i] >= threshold).collect();

    // Ascent walks. Raw labels are 1-based indexes into `peaks`.
    let mut raw = vec![0usize; n];
    let mut peaks: Vec<usize> = Vec::new();
    let mut path = Vec::new();
    for start in 0..n {
        if !usable[start] || raw[start] != 0 {
            continue;
        }
        path.clear();
        let mut cur = start;
        let label = loop {
            path.push(cur);
            let best = grid
                .neighbors(cur)
                .filter(|&j| usable[j])
                .reduce(|best, j| if grid.above(j, best) { j } else { best });
            match best {
                Some(next) if grid.above(next, cur) => {
                    if raw[next] != 0 {
                        break raw[next];
                    }
                    cur = next;
                }
                _ => {
                    peaks.push(cur);
                    break peaks.len();
                }
            }
        };
        for &p in &path {
            raw[p] = label;
        }
    }

    let k = peaks.len();
    let mut parent: Vec<usize> = (0..=k).collect();
    if k > 1 && params.min_dip_mult > 0.0 {
        merge_shallow_dips(&grid, &raw, &peaks, params.min_dip_mult * params.rms, &mut parent);
    }

    // Resolve merges and measure sizes.
    let mut root_of = vec![0usize; k + 1];
    let mut size = vec![0usize; k + 1];
    for (l, root) in root_of.iter_mut().enumerate().skip(1) {
        *root = find(&mut parent, l);
    }
    for &l in &raw {
        if l != 0 {
            size[root_of[l]] += 1;
        }
    }

    // Survivors renumbered by decreasing peak.
    let mut survivors: Vec<usize> = (1..=k)
        .filter(|&l| root_of[l] == l && size[l] >= params.min_pix)
        .collect();
    survivors.sort_by(|&a, &b| {
        let (pa, pb) = (peaks[a - 1], peaks[b - 1]);
        if pa == pb {
            Ordering::Equal
        } else if grid.above(pa, pb) {
            Ordering::Less
        } else {
            Ordering::Greater
        }
    });
    let mut final_id = vec![0i32; k + 1];
    for (i, &root) in survivors.iter().enumerate() {
        final_id[root] = i as i32 + 1;
    }

    let mut labels = Vec::with_capacity(n);
    let mut clumps: Vec<Clump> = survivors
        .iter()
        .enumerate()
        .map(|(i, &root)| {
            let peak = peaks[root - 1];
            Clump {
                id: i as u32 + 1,
                level: 0,
                voxels: Vec::with_capacity(size[root]),
                peak_pos: grid.coords(peak),
                peak_val: values[peak],
                total_intensity: 0.0,
                centroid: [0.0; 3],
            }
        })
        .collect();
    for (i, &l) in raw.iter().enumerate() {
        let id = if l == 0 { 0 } else { final_id[root_of[l]] };
        labels.push(id);
        if id > 0 {
            let c = &mut clumps[id as usize - 1];
            c.voxels.push(grid.coords(i));
            c.total_intensity += values[i];
        }
    }
    for c in &mut clumps {
        c.centroid = crate::hierarchy::centroid(c, cube).unwrap_or_else(|_| mean_position(&c.voxels));
    }

    let caa = Caa {
        labels: Array3::from_shape_vec(cube.dims(), labels).expect("one label per voxel"),
        n_clumps: clumps.len(),
    };
    Ok((caa, clumps))
}

fn mean_position(voxels: &[Dims]) -> [f64; 3] {
    let n = voxels.len().max(1) as f64;
    let mut acc = [0.0; 3];
    for v in voxels {
        for ax in 0..3 {
            acc[ax] += v[ax] as f64;
        }
    }
    acc.map(|s| s / n)
}

/// Merges adjacent clumps whose dip `min(peak_a, peak_b) - col` is below
/// `max_dip`, smallest dip first, until no such pair remains. The col of a
/// pair is the highest `min(value_u, value_w)` over touching voxel pairs.
fn merge_shallow_dips(grid: &Grid<'_>, raw: &[usize], peaks: &[usize], max_dip: f64, parent: &mut [usize]) {
    let k = peaks.len();
    let mut cols: HashMap<(usize, usize), f64> = HashMap::new();
    for (u, &a) in raw.iter().enumerate() {
        if a == 0 {
            continue;
        }
        for w in grid.neighbors(u) {
            let b = raw[w];
            if b > a {
                let col = grid.values[u].min(grid.values[w]);
                cols.entry((a, b))
                    .and_modify(|c| *c = c.max(col))
                    .or_insert(col);
            }
        }
    }

    let mut adj: Vec<BTreeMap<usize, f64>> = vec![BTreeMap::new(); k + 1];
    for (&(a, b), &col) in &cols {
        adj[a].insert(b, col);
        adj[b].insert(a, col);
    }
    let peak_val = |l: usize| grid.values[peaks[l - 1]];
    let dip = |a: usize, b: usize, col: f64| peak_val(a).min(peak_val(b)) - col;

    let mut heap = BinaryHeap::new();
    for (a, edges) in adj.iter().enumerate().skip(1) {
        for (&b, &col) in edges {
            if a < b {
                let d = dip(a, b, col);
                if d < max_dip {
                    heap.push(MergeCandidate { dip: d, a, b });
                }
            }
        }
    }

    while let Some(MergeCandidate { dip: d, a, b }) = heap.pop() {
        if parent[a] != a || parent[b] != b {
            continue;
        }
        // stale entries no longer match the current col
        match adj[a].get(&b) {
            Some(&col) if dip(a, b, col) == d => {}
            _ => continue,
        }
        let (keep, gone) = if grid.above(peaks[a - 1], peaks[b - 1]) { (a, b) } else { (b, a) };
        parent[gone] = keep;
        let moved = std::mem::take(&mut adj[gone]);
        adj[keep].remove(&gone);
        for (nb, col) in moved {
            if nb == keep {
                continue;
            }
            adj[nb].remove(&gone);
            let merged = adj[keep].get(&nb).map_or(col, |&c| c.max(col));
            adj[keep].insert(nb, merged);
            adj[nb].insert(keep, merged);
            let nd = dip(keep, nb, merged);
            if nd < max_dip {
                heap.push(MergeCandidate {
                    dip: nd,
                    a: keep.min(nb),
                    b: keep.max(nb),
                });
            }
        }
    }
}
