//! Cross-level linking of clumps into a tree.
//!
//! A clump at level `i` becomes the child of whichever level `i + 1` clump
//! owns its representative voxel: the rounded intensity-weighted centroid
//! by default, or the peak voxel in [`LinkMode::Peak`]. Nodes are named
//! `L{level}C{id}`.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::clumping::{Caa, Clump};
use crate::cube::{Cube, Dims};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum LinkMode {
    #[default]
    Centroid,
    Peak,
}

impl FromStr for LinkMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "centroid" => Ok(LinkMode::Centroid),
            "peak" => Ok(LinkMode::Peak),
            _ => Err(Error::InvalidParameter(format!("unknown link mode {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TreeFormat {
    Dot,
    Json,
}

/// Intensity-weighted mean voxel position, normalized by total intensity.
pub fn centroid(clump: &Clump, cube: &Cube) -> Result<[f64; 3]> {
    let data = cube.data();
    let mut weighted = [0.0; 3];
    let mut total = 0.0;
    for &v in &clump.voxels {
        let w = data[v];
        total += w;
        for ax in 0..3 {
            weighted[ax] += v[ax] as f64 * w;
        }
    }
    if clump.voxels.is_empty() || total == 0.0 {
        return Err(Error::ZeroIntensity);
    }
    Ok(weighted.map(|s| s / total))
}

pub fn node_id(level: usize, clump: u32) -> String {
    format!("L{level}C{clump}")
}

/// Rounds half away from zero and clamps into the cube.
pub fn representative_voxel(pos: [f64; 3], dims: Dims) -> Dims {
    let mut out = [0usize; 3];
    for ax in 0..3 {
        let r = pos[ax].round();
        out[ax] = if r <= 0.0 { 0 } else { (r as usize).min(dims[ax] - 1) };
    }
    out
}

fn probe(clump: &Clump, mode: LinkMode, dims: Dims) -> Dims {
    match mode {
        LinkMode::Centroid => representative_voxel(clump.centroid, dims),
        LinkMode::Peak => clump.peak_pos,
    }
}

/// One segmented level as input to [`link_levels`].
#[derive(Debug, Clone, Copy)]
pub struct LevelClumps<'a> {
    pub level: usize,
    pub cube: &'a Cube,
    pub caa: &'a Caa,
    pub clumps: &'a [Clump],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Node {
    pub id: String,
    pub level: usize,
    pub clump: u32,
    pub centroid: [f64; 3],
    pub n_pix: usize,
    pub peak_val: f64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Edge {
    pub parent: String,
    pub child: String,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct HierarchyTree {
    pub nodes: Vec<Node>,
    pub edges: Vec<Edge>,
}

impl HierarchyTree {
    /// Node ids that touch no edge, in node order.
    pub fn isolated(&self) -> Vec<&str> {
        let linked: BTreeSet<&str> = self
            .edges
            .iter()
            .flat_map(|e| [e.parent.as_str(), e.child.as_str()])
            .collect();
        self.nodes
            .iter()
            .map(|n| n.id.as_str())
            .filter(|id| !linked.contains(id))
            .collect()
    }

    pub fn children_of(&self, parent: &str) -> Vec<&str> {
        self.edges
            .iter()
            .filter(|e| e.parent == parent)
            .map(|e| e.child.as_str())
            .collect()
    }

    pub fn parent_of(&self, child: &str) -> Option<&str> {
        self.edges.iter().find(|e| e.child == child).map(|e| e.parent.as_str())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph hierarchy {\n");
        for n in &self.nodes {
            let _ = writeln!(out, "  \"{}\" [level={}, n_pix={}];", n.id, n.level, n.n_pix);
        }
        for e in &self.edges {
            let _ = writeln!(out, "  \"{}\" -> \"{}\";", e.parent, e.child);
        }
        out.push_str("}\n");
        out
    }
}

pub fn export_tree(tree: &HierarchyTree, format: TreeFormat) -> Result<String> {
    match format {
        TreeFormat::Dot => Ok(tree.to_dot()),
        TreeFormat::Json => tree.to_json(),
    }
}

fn check_levels(levels: &[LevelClumps<'_>]) -> Result<()> {
    let Some(first) = levels.first() else {
        return Ok(());
    };
    let dims = first.cube.dims();
    for (i, lv) in levels.iter().enumerate() {
        if i > 0 && lv.level <= levels[i - 1].level {
            return Err(Error::InvalidParameter("levels must be strictly ascending".into()));
        }
        for found in [lv.cube.dims(), lv.caa.dims()] {
            if found != dims {
                return Err(Error::DimsMismatch {
                    expected: dims,
                    found,
                }
                .at_level(lv.level));
            }
        }
    }
    Ok(())
}

/// Builds the tree. Only adjacent levels are linked.
pub fn link_levels(levels: &[LevelClumps<'_>], mode: LinkMode) -> Result<HierarchyTree> {
    check_levels(levels)?;
    let mut tree = HierarchyTree::default();
    for lv in levels {
        tree.nodes.extend(lv.clumps.iter().map(|c| Node {
            id: node_id(lv.level, c.id),
            level: lv.level,
            clump: c.id,
            centroid: c.centroid,
            n_pix: c.n_pix(),
            peak_val: c.peak_val,
        }));
    }
    for pair in levels.windows(2) {
        let (fine, coarse) = (&pair[0], &pair[1]);
        if coarse.level != fine.level + 1 {
            continue;
        }
        let dims = coarse.caa.dims();
        for c in fine.clumps {
            let parent = coarse.caa.label_at(probe(c, mode, dims));
            if parent > 0 {
                tree.edges.push(Edge {
                    parent: node_id(coarse.level, parent as u32),
                    child: node_id(fine.level, c.id),
                });
            }
        }
    }
    Ok(tree)
}

/// Re-checks every edge against the stored label arrays.
pub fn verify_edges(tree: &HierarchyTree, levels: &[LevelClumps<'_>], mode: LinkMode) -> Result<()> {
    let lookup = |id: &str| -> Option<(&LevelClumps<'_>, &Clump)> {
        levels.iter().find_map(|lv| {
            lv.clumps
                .iter()
                .find(|c| node_id(lv.level, c.id) == id)
                .map(|c| (lv, c))
        })
    };
    for e in &tree.edges {
        let bad = |why: &str| Error::InvalidParameter(format!("edge {} -> {}: {why}", e.parent, e.child));
        let (child_lv, child) = lookup(&e.child).ok_or_else(|| bad("unknown child"))?;
        let (parent_lv, parent) = lookup(&e.parent).ok_or_else(|| bad("unknown parent"))?;
        if parent_lv.level != child_lv.level + 1 {
            return Err(bad("levels not adjacent"));
        }
        let v = probe(child, mode, parent_lv.caa.dims());
        if parent_lv.caa.label_at(v) != parent.id as i32 {
            return Err(bad("containment does not hold"));
        }
    }
    let mut seen = BTreeSet::new();
    for e in &tree.edges {
        if !seen.insert(e.child.as_str()) {
            return Err(Error::InvalidParameter(format!("{} has two parents", e.child)));
        }
    }
    Ok(())
}
