//! Connected-component labelling of a binary grid.
//!
//! Classic two-pass algorithm: a raster scan assigns provisional labels and
//! records equivalences in a disjoint-set forest, then a second scan
//! resolves every pixel to a compact label. Final labels are numbered
//! `1..=count` in order of each component's first pixel in row-major order,
//! so label 1 always owns the lexicographically smallest `(row, col)`.

use crate::config::Connectivity;

/// Per-pixel component labels; `0` marks background.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComponentLabels {
    pub height: usize,
    pub width: usize,
    pub labels: Vec<u32>,
    pub count: usize,
}

impl ComponentLabels {
    pub fn get(&self, row: usize, col: usize) -> u32 {
        self.labels[row * self.width + col]
    }
}

struct DisjointSet {
    parent: Vec<u32>,
}

impl DisjointSet {
    fn new() -> Self {
        // slot 0 is the background sentinel
        Self { parent: vec![0] }
    }

    fn make(&mut self) -> u32 {
        let id = self.parent.len() as u32;
        self.parent.push(id);
        id
    }

    fn find(&mut self, mut x: u32) -> u32 {
        while self.parent[x as usize] != x {
            let grandparent = self.parent[self.parent[x as usize] as usize];
            self.parent[x as usize] = grandparent;
            x = grandparent;
        }
        x
    }

    fn union(&mut self, a: u32, b: u32) {
        let ra = self.find(a);
        let rb = self.find(b);
        if ra != rb {
            // keep the older (smaller) label as root
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[hi as usize] = lo;
        }
    }
}

/// Labels the `true` cells of a row-major `height × width` mask.
pub fn label_components(
    mask: &[bool],
    height: usize,
    width: usize,
    connectivity: Connectivity,
) -> ComponentLabels {
    assert_eq!(
        mask.len(),
        height * width,
        "mask length must equal height * width"
    );
    let mut provisional = vec![0u32; mask.len()];
    let mut sets = DisjointSet::new();

    for row in 0..height {
        for col in 0..width {
            let idx = row * width + col;
            if !mask[idx] {
                continue;
            }
            // already-visited neighbours in raster order
            let mut neighbours = [0u32; 4];
            let mut n = 0;
            if col > 0 {
                neighbours[n] = provisional[idx - 1];
                n += 1;
            }
            if row > 0 {
                let up = idx - width;
                neighbours[n] = provisional[up];
                n += 1;
                if connectivity == Connectivity::Eight {
                    if col > 0 {
                        neighbours[n] = provisional[up - 1];
                        n += 1;
                    }
                    if col + 1 < width {
                        neighbours[n] = provisional[up + 1];
                        n += 1;
                    }
                }
            }
            let mut current = 0;
            for &label in neighbours[..n].iter().filter(|&&l| l != 0) {
                if current == 0 {
                    current = label;
                } else {
                    sets.union(current, label);
                }
            }
            if current == 0 {
                current = sets.make();
            }
            provisional[idx] = current;
        }
    }

    let mut compact = vec![0u32; sets.parent.len()];
    let mut count = 0u32;
    let mut labels = vec![0u32; mask.len()];
    for (idx, &p) in provisional.iter().enumerate() {
        if p == 0 {
            continue;
        }
        let root = sets.find(p) as usize;
        if compact[root] == 0 {
            count += 1;
            compact[root] = count;
        }
        labels[idx] = compact[root];
    }

    ComponentLabels {
        height,
        width,
        labels,
        count: count as usize,
    }
}
